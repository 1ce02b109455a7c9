//! Symmetric tridiagonal eigenproblems via Sturm bisection plus inverse
//! iteration, and an LU factorization of general tridiagonal matrices with
//! partial pivoting (fill confined to a second superdiagonal).

use num_complex::Complex64;

/// Symmetric tridiagonal matrix: `diag` has length n, `off` length n-1.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len());
        Self { diag, off }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0usize;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.n() {
            let e2 = self.off[i - 1] * self.off[i - 1];
            if q == 0.0 {
                q = f64::EPSILON * (self.off[i - 1].abs() + f64::MIN_POSITIVE);
            }
            q = self.diag[i] - x - e2 / q;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k` smallest eigenvalues by bisection, ascending, each resolved to
    /// roughly machine precision relative to the spectral scale.
    pub fn smallest_eigenvalues(&self, k: usize) -> Vec<f64> {
        let (glo, ghi) = self.gershgorin();
        let scale = glo.abs().max(ghi.abs()).max(f64::MIN_POSITIVE);
        (0..k).map(|j| self.kth_eigenvalue(j, glo, ghi, scale)).collect()
    }

    /// Eigenvalue number `j` (0-based, ascending) by bisection on the Sturm count.
    fn kth_eigenvalue(&self, j: usize, glo: f64, ghi: f64, scale: f64) -> f64 {
        let mut lo = glo;
        let mut hi = ghi;
        let tol = 4.0 * f64::EPSILON * scale;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Rayleigh quotient `v·(T v)` for a unit vector `v`.
    pub fn rayleigh_quotient(&self, v: &[f64]) -> f64 {
        let n = self.n();
        let mut acc = 0.0f64;
        for i in 0..n {
            let mut y = self.diag[i] * v[i];
            if i > 0 {
                y += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                y += self.off[i] * v[i + 1];
            }
            acc += v[i] * y;
        }
        acc
    }

    /// Lowest eigenvalue polished to machine precision: bisection gives the
    /// shift, inverse iteration the eigenvector, whose Rayleigh quotient is
    /// accurate to the residual squared (bisection alone saturates at
    /// `eps * spectral_scale`, too coarse for differencing stiff operators).
    pub fn smallest_eigenvalue_polished(&self, start: &[f64]) -> f64 {
        let lam = self.smallest_eigenvalues(1)[0];
        let v = self.eigenvector(lam, start);
        self.rayleigh_quotient(&v)
    }

    /// Eigenvector for a converged eigenvalue by inverse iteration starting
    /// from `start` (normalized on exit, Euclidean norm).
    pub fn eigenvector(&self, lambda: f64, start: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(start.len(), n);
        let scale: f64 = self.diag.iter().fold(0.0f64, |a, &d| a.max(d.abs()));
        // shift slightly off the eigenvalue so the factorization stays regular
        let shift = lambda * (1.0 + 8.0 * f64::EPSILON) + 8.0 * f64::EPSILON * scale;
        let d: Vec<f64> = self.diag.iter().map(|&x| x - shift).collect();
        let lu = PivotedTridiagLu::factor(&self.off, &d, &self.off);
        let mut v = start.to_vec();
        normalize(&mut v);
        for _ in 0..3 {
            lu.solve_real(&mut v);
            normalize(&mut v);
        }
        v
    }
}

fn normalize(v: &mut [f64]) {
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nrm > 0.0 {
        v.iter_mut().for_each(|x| *x /= nrm);
    }
}

/// LU factorization of a general tridiagonal matrix with partial pivoting.
/// Row swaps introduce fill in a second superdiagonal only.
#[derive(Debug, Clone)]
pub struct PivotedTridiagLu {
    n: usize,
    mult: Vec<f64>, // multipliers
    d: Vec<f64>,    // pivots
    du: Vec<f64>,   // first superdiagonal after elimination
    du2: Vec<f64>,  // second superdiagonal (fill)
    swapped: Vec<bool>,
}

impl PivotedTridiagLu {
    /// Factor the matrix with subdiagonal `dl`, diagonal `d`, superdiagonal `du`.
    pub fn factor(dl: &[f64], d: &[f64], du: &[f64]) -> Self {
        let n = d.len();
        assert_eq!(dl.len() + 1, n);
        assert_eq!(du.len() + 1, n);
        let mut a = d.to_vec();
        let mut b: Vec<f64> = du.to_vec();
        b.push(0.0);
        let mut c: Vec<f64> = dl.to_vec();
        c.push(0.0);
        let mut du2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut swapped = vec![false; n];
        for i in 0..n.saturating_sub(1) {
            if c[i].abs() > a[i].abs() {
                // swap rows i and i+1
                swapped[i] = true;
                std::mem::swap(&mut a[i], &mut c[i]); // pivot <- dl
                std::mem::swap(&mut b[i], &mut a[i + 1]);
                if i + 2 < n {
                    du2[i] = b[i + 1];
                    b[i + 1] = 0.0;
                }
            }
            let piv = if a[i] != 0.0 {
                a[i]
            } else {
                f64::MIN_POSITIVE.sqrt()
            };
            let m = c[i] / piv;
            mult[i] = m;
            a[i + 1] -= m * b[i];
            if i + 2 < n {
                b[i + 1] -= m * du2[i];
            }
            c[i] = 0.0;
        }
        Self {
            n,
            mult,
            d: a,
            du: b,
            du2,
            swapped,
        }
    }

    fn pivot(&self, i: usize) -> f64 {
        let p = self.d[i];
        if p != 0.0 {
            p
        } else {
            f64::MIN_POSITIVE.sqrt()
        }
    }

    /// Solve in place for a real right-hand side.
    pub fn solve_real(&self, rhs: &mut [f64]) {
        let n = self.n;
        assert_eq!(rhs.len(), n);
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                rhs.swap(i, i + 1);
            }
            rhs[i + 1] -= self.mult[i] * rhs[i];
        }
        for i in (0..n).rev() {
            let mut x = rhs[i];
            if i + 1 < n {
                x -= self.du[i] * rhs[i + 1];
            }
            if i + 2 < n {
                x -= self.du2[i] * rhs[i + 2];
            }
            rhs[i] = x / self.pivot(i);
        }
    }

    /// Solve in place for a complex right-hand side (factors are real).
    pub fn solve_complex(&self, rhs: &mut [Complex64]) {
        let n = self.n;
        assert_eq!(rhs.len(), n);
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                rhs.swap(i, i + 1);
            }
            let t = rhs[i] * self.mult[i];
            rhs[i + 1] -= t;
        }
        for i in (0..n).rev() {
            let mut x = rhs[i];
            if i + 1 < n {
                x -= rhs[i + 1] * self.du[i];
            }
            if i + 2 < n {
                x -= rhs[i + 2] * self.du2[i];
            }
            rhs[i] = x / self.pivot(i);
        }
    }
}

/// Preconditioned conjugate gradient restricted to the orthogonal complement
/// of `deflate`, for a symmetric positive semidefinite `apply_a` whose kernel
/// is spanned by `deflate`. The right-hand side is projected internally.
pub fn deflated_pcg(
    apply_a: &dyn Fn(&[f64], &mut [f64]),
    apply_m: &dyn Fn(&[f64], &mut [f64]),
    deflate: &[f64],
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, f64> {
    let n = rhs.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let project = |v: &mut [f64]| {
        let c = dot(v, deflate);
        v.iter_mut().zip(deflate).for_each(|(x, d)| *x -= c * d);
    };
    let input_norm = dot(rhs, rhs).sqrt();
    let mut r = rhs.to_vec();
    project(&mut r);
    let projected_norm = dot(&r, &r).sqrt();
    // right-hand side entirely inside the deflated direction
    if projected_norm <= 1e-14 * input_norm.max(f64::MIN_POSITIVE) {
        return Ok(vec![0.0; n]);
    }
    let rhs_norm = projected_norm;
    let mut x = vec![0.0; n];
    let mut z = vec![0.0; n];
    apply_m(&r, &mut z);
    project(&mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        apply_a(&p, &mut ap);
        project(&mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(dot(&r, &r).sqrt() / rhs_norm);
        }
        let alpha = rz / pap;
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.iter_mut().zip(&ap).for_each(|(ri, ai)| *ri -= alpha * ai);
        if dot(&r, &r).sqrt() <= tol * rhs_norm {
            project(&mut x);
            return Ok(x);
        }
        apply_m(&r, &mut z);
        project(&mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    Err(dot(&r, &r).sqrt() / rhs_norm)
}

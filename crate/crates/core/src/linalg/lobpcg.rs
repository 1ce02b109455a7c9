//! Locally optimal block preconditioned conjugate gradient (LOBPCG) for the
//! smallest eigenvalues of a Hermitian operator in the standard inner
//! product. The trial space per iteration is span[X, M⁻¹R, P]; the shadow
//! block `A·V` is carried through every basis transformation so each
//! iteration costs one block application of `A` (on the preconditioned
//! residuals) plus one of `M⁻¹`.

use num_complex::Complex64;

use super::dense::{hermitian_eigen, mgs_orthonormalize_pair, norm, ColMat};
use super::sparse::CsrMatrix;

pub trait LinOp: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);

    fn apply_block(&self, x: &ColMat, y: &mut ColMat) {
        for j in 0..x.cols {
            let xc = x.col(j).to_vec();
            self.apply(&xc, y.col_mut(j));
        }
    }
}

impl LinOp for CsrMatrix {
    fn dim(&self) -> usize {
        self.n()
    }
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.matvec(x, y);
    }
}

pub trait Precond: Sync {
    fn apply_block(&self, r: &ColMat, z: &mut ColMat);
}

#[derive(Debug, Clone)]
pub struct LobpcgOptions {
    /// Number of eigenpairs whose residuals gate convergence.
    pub wanted: usize,
    /// Block size (>= wanted; extra columns guard clustered eigenvalues).
    pub block: usize,
    /// Convergence threshold on residual norms, relative to `norm_estimate`.
    pub tol_rel: f64,
    pub max_iter: usize,
    /// Scale used for the convergence test, typically a Gershgorin bound.
    pub norm_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct LobpcgResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ColMat,
    pub residual_norms: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

const DROP_TOL: f64 = 1e-7;

/// Run LOBPCG from the deterministic start block `x0`.
pub fn lobpcg(
    op: &dyn LinOp,
    precond: Option<&dyn Precond>,
    x0: ColMat,
    opts: &LobpcgOptions,
) -> LobpcgResult {
    let n = op.dim();
    assert_eq!(x0.n, n);
    assert!(opts.block >= opts.wanted);
    assert!(x0.cols >= opts.block);
    let mut m = opts.block;
    let scale = opts.norm_estimate.max(f64::MIN_POSITIVE);
    // never ask for residuals below the rounding floor of the matrix scale
    let tol_abs = (opts.tol_rel * scale).max(32.0 * f64::EPSILON * scale);

    let mut x = x0;
    let mut shadow = x.clone();
    mgs_orthonormalize_pair(&mut x, &mut shadow, DROP_TOL);
    assert!(x.cols >= m, "start block is rank deficient");
    x = x.slice_cols(0, m);
    let mut ax = ColMat::zeros(n, m);
    op.apply_block(&x, &mut ax);
    let (mut lambda, mut x, mut ax) = rayleigh_ritz(&x, &ax, m);

    let mut p: Option<(ColMat, ColMat)> = None;
    let mut iterations = 0usize;
    let mut residuals = vec![f64::INFINITY; m];
    let mut converged = false;
    let mut best_residual = f64::INFINITY;
    let mut since_improvement = 0usize;

    for it in 0..opts.max_iter {
        iterations = it + 1;
        // residual block
        let mut r = ax.clone();
        for (j, &lam) in lambda.iter().enumerate().take(m) {
            let xc = x.col(j).to_vec();
            let rc = r.col_mut(j);
            for (ri, xi) in rc.iter_mut().zip(&xc) {
                *ri -= lam * xi;
            }
        }
        for (j, res) in residuals.iter_mut().enumerate().take(m) {
            *res = norm(r.col(j));
        }
        let worst = residuals[..opts.wanted.min(m)]
            .iter()
            .cloned()
            .fold(0.0, f64::max);
        if worst <= tol_abs {
            converged = true;
            break;
        }
        // stagnation watch: stop once the wanted residuals have been flat for
        // a long stretch (the rounding floor has been hit)
        if worst < 0.7 * best_residual {
            best_residual = worst;
            since_improvement = 0;
        } else {
            since_improvement += 1;
            if since_improvement > 50 {
                break;
            }
        }
        let mut w = ColMat::zeros(n, m);
        match precond {
            Some(pc) => pc.apply_block(&r, &mut w),
            None => w = r.clone(),
        }
        let mut aw = ColMat::zeros(n, m);
        op.apply_block(&w, &mut aw);

        let mut v = x.clone();
        let mut av = ax.clone();
        v.hstack(&w);
        av.hstack(&aw);
        if let Some((pb, apb)) = &p {
            v.hstack(pb);
            av.hstack(apb);
        }
        let rank = mgs_orthonormalize_pair(&mut v, &mut av, DROP_TOL);
        let m_eff = m.min(rank);
        if m_eff == 0 {
            break;
        }
        let s = v.gram(&av);
        let (evals, c) = hermitian_eigen(&s);
        // breakdown guard: Ritz values outside the Gershgorin disc mean the
        // carried A·V block has lost accuracy; keep the last good state
        if !evals[0].is_finite() || evals[0] < -1.5 * scale {
            break;
        }
        let cx = c.first_cols(m_eff);
        let x_new = v.mul_small(&cx);
        let ax_new = av.mul_small(&cx);
        // conjugate directions: same Ritz rotation with the X-rows removed
        let cp = cx.zero_first_rows(m);
        let mut p_new = v.mul_small(&cp);
        let mut ap_new = av.mul_small(&cp);
        let p_rank = mgs_orthonormalize_pair(&mut p_new, &mut ap_new, DROP_TOL);
        p = if p_rank > 0 { Some((p_new, ap_new)) } else { None };
        lambda = evals[..m_eff].to_vec();
        x = x_new;
        ax = ax_new;
        if m_eff < m {
            // basis collapsed (typically at convergence)
            residuals.truncate(m_eff);
            m = m_eff;
        }
    }

    // final residuals
    let m_eff = x.cols;
    let mut res = vec![0.0; m_eff];
    for j in 0..m_eff {
        let xc = x.col(j);
        let axc = ax.col(j);
        let mut acc = 0.0f64;
        for (a, b) in axc.iter().zip(xc) {
            acc += (a - lambda[j] * b).norm_sqr();
        }
        res[j] = acc.sqrt();
    }
    LobpcgResult {
        eigenvalues: lambda,
        eigenvectors: x,
        residual_norms: res,
        iterations,
        converged,
    }
}

/// Rayleigh-Ritz restriction of `A` to the (orthonormal) columns of `x`.
fn rayleigh_ritz(x: &ColMat, ax: &ColMat, m: usize) -> (Vec<f64>, ColMat, ColMat) {
    let s = x.gram(ax);
    let (evals, c) = hermitian_eigen(&s);
    let keep = m.min(x.cols);
    let cx = c.first_cols(keep);
    (evals[..keep].to_vec(), x.mul_small(&cx), ax.mul_small(&cx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::tridiag::SymTridiag;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// 1D Schroedinger operator -u'' + V u with Dirichlet ends as CSR;
    /// oracle = Sturm bisection on the same tridiagonal.
    #[test]
    fn lobpcg_matches_sturm_oracle() {
        let n = 400;
        let dx = 20.0 / (n as f64 + 1.0);
        let pot = |i: usize| {
            let x = (i as f64 + 1.0) * dx - 10.0;
            x * x
        };
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..n {
            rows.push(i as u32);
            cols.push(i as u32);
            vals.push(c(2.0 / (dx * dx) + pot(i), 0.0));
            if i + 1 < n {
                for (r, cc) in [(i, i + 1), (i + 1, i)] {
                    rows.push(r as u32);
                    cols.push(cc as u32);
                    vals.push(c(-1.0 / (dx * dx), 0.0));
                }
            }
        }
        let a = CsrMatrix::from_triplets(n, &rows, &cols, &vals);
        assert_eq!(a.hermiticity_error(), 0.0);
        let tri = SymTridiag::new(
            (0..n).map(|i| 2.0 / (dx * dx) + pot(i)).collect(),
            vec![-1.0 / (dx * dx); n - 1],
        );
        let exact = tri.smallest_eigenvalues(3);

        let mut x0 = ColMat::zeros(n, 5);
        for j in 0..5 {
            for i in 0..n {
                let xx = (i as f64 + 1.0) * dx - 10.0;
                x0.col_mut(j)[i] = c((-0.5 * xx * xx).exp() * xx.powi(j as i32), 0.0);
            }
        }
        let opts = LobpcgOptions {
            wanted: 3,
            block: 5,
            tol_rel: 1e-10,
            max_iter: 300,
            norm_estimate: a.gershgorin_bound(),
        };
        let out = lobpcg(&a, None, x0, &opts);
        assert!(out.converged, "iters {} res {:?}", out.iterations, out.residual_norms);
        for k in 0..3 {
            assert_abs_diff_eq!(out.eigenvalues[k], exact[k], epsilon = 1e-8);
        }
    }

    /// Magnetic ring with constant link phase: (-i d/ds - a)^2 discretized with
    /// Peierls hopping has the exact discrete spectrum
    /// (4/ds^2) sin^2((2 pi k / n - a ds)/2).
    #[test]
    fn lobpcg_complex_hermitian_ring() {
        let n = 64;
        let ds = 2.0 * std::f64::consts::PI / n as f64;
        let a_field = 0.37;
        let theta = a_field * ds;
        let hop = c((theta).cos(), (theta).sin()) / (ds * ds);
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..n {
            let ip = (i + 1) % n;
            rows.push(i as u32);
            cols.push(i as u32);
            vals.push(c(2.0 / (ds * ds), 0.0));
            rows.push(i as u32);
            cols.push(ip as u32);
            vals.push(-hop.conj());
            rows.push(ip as u32);
            cols.push(i as u32);
            vals.push(-hop);
        }
        let a = CsrMatrix::from_triplets(n, &rows, &cols, &vals);
        assert!(a.hermiticity_error() < 1e-15);
        let mut exact: Vec<f64> = (0..n)
            .map(|k| {
                let kk = 2.0 * std::f64::consts::PI * k as f64 / (n as f64 * ds);
                let x = (kk * ds - theta) / 2.0;
                4.0 / (ds * ds) * x.sin().powi(2)
            })
            .collect();
        exact.sort_by(|x, y| x.partial_cmp(y).unwrap());

        let mut x0 = ColMat::zeros(n, 4);
        for j in 0..4 {
            for i in 0..n {
                let s = i as f64 * ds;
                x0.col_mut(j)[i] = Complex64::from_polar(1.0, (j as f64) * s) * (1.0 + 0.05 * (s * 3.0).cos());
            }
        }
        let opts = LobpcgOptions {
            wanted: 2,
            block: 4,
            tol_rel: 1e-11,
            max_iter: 200,
            norm_estimate: a.gershgorin_bound(),
        };
        let out = lobpcg(&a, None, x0, &opts);
        assert!(out.converged);
        assert_abs_diff_eq!(out.eigenvalues[0], exact[0], epsilon = 1e-9);
        assert_abs_diff_eq!(out.eigenvalues[1], exact[1], epsilon = 1e-9);
    }
}

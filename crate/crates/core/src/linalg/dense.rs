//! Dense helpers for the block eigensolver: tall column-major blocks of
//! complex vectors, small Hermitian matrices, and a cyclic Jacobi
//! eigensolver for the Rayleigh-Ritz systems (dimension <= a few dozen).

use num_complex::Complex64;

/// Tall dense matrix, column major, entries `Complex64`.
#[derive(Debug, Clone)]
pub struct ColMat {
    pub n: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl ColMat {
    pub fn zeros(n: usize, cols: usize) -> Self {
        Self {
            n,
            cols,
            data: vec![Complex64::new(0.0, 0.0); n * cols],
        }
    }

    pub fn from_columns(n: usize, columns: Vec<Vec<Complex64>>) -> Self {
        let cols = columns.len();
        let mut data = Vec::with_capacity(n * cols);
        for c in &columns {
            assert_eq!(c.len(), n);
            data.extend_from_slice(c);
        }
        Self { n, cols, data }
    }

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.n..(j + 1) * self.n]
    }

    /// Append the columns of `other`.
    pub fn hstack(&mut self, other: &ColMat) {
        assert_eq!(self.n, other.n);
        self.data.extend_from_slice(&other.data);
        self.cols += other.cols;
    }

    /// Keep only columns `[lo, hi)`.
    pub fn slice_cols(&self, lo: usize, hi: usize) -> ColMat {
        ColMat {
            n: self.n,
            cols: hi - lo,
            data: self.data[lo * self.n..hi * self.n].to_vec(),
        }
    }

    /// Gram matrix `self^H * other`.
    pub fn gram(&self, other: &ColMat) -> SmallMat {
        assert_eq!(self.n, other.n);
        let mut g = SmallMat::zeros(self.cols, other.cols);
        for j in 0..other.cols {
            let oc = other.col(j);
            for i in 0..self.cols {
                g.data[j * self.cols + i] = dot(self.col(i), oc);
            }
        }
        g
    }

    /// `self * s` for a small matrix `s`.
    pub fn mul_small(&self, s: &SmallMat) -> ColMat {
        assert_eq!(self.cols, s.rows);
        let mut out = ColMat::zeros(self.n, s.cols);
        for j in 0..s.cols {
            let oc = out.col_mut(j);
            for k in 0..s.rows {
                let coef = s.data[j * s.rows + k];
                if coef.norm_sqr() == 0.0 {
                    continue;
                }
                let ic = &self.data[k * self.n..(k + 1) * self.n];
                for (o, x) in oc.iter_mut().zip(ic) {
                    *o += coef * x;
                }
            }
        }
        out
    }
}

pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Twice-iterated modified Gram-Schmidt applied simultaneously to `v` and a
/// shadow block `av` (which receives the identical column operations, so that
/// `av = A v` stays valid for linear `A`). Columns that collapse below
/// `drop_tol` of their original norm are removed from both blocks. Returns the
/// retained rank.
pub fn mgs_orthonormalize_pair(v: &mut ColMat, av: &mut ColMat, drop_tol: f64) -> usize {
    assert_eq!(v.cols, av.cols);
    let n = v.n;
    let mut kept: Vec<usize> = Vec::with_capacity(v.cols);
    for j in 0..v.cols {
        let orig = norm(v.col(j)).max(f64::MIN_POSITIVE);
        for _pass in 0..2 {
            for &i in &kept {
                let r = dot(v.col(i), v.col(j));
                // v_j -= r v_i ; av_j -= r av_i
                let (vi, vj) = split_two(&mut v.data, n, i, j);
                vj.iter_mut().zip(vi.iter()).for_each(|(x, y)| *x -= r * y);
                let (ai, aj) = split_two(&mut av.data, n, i, j);
                aj.iter_mut().zip(ai.iter()).for_each(|(x, y)| *x -= r * y);
            }
        }
        let nrm = norm(v.col(j));
        if nrm > drop_tol * orig && nrm > 0.0 {
            let inv = 1.0 / nrm;
            v.col_mut(j).iter_mut().for_each(|x| *x *= inv);
            av.col_mut(j).iter_mut().for_each(|x| *x *= inv);
            kept.push(j);
        }
    }
    // compact the kept columns to the front
    for (dst, &src) in kept.iter().enumerate() {
        if dst != src {
            let (lo, hi) = (dst.min(src), dst.max(src));
            let (_, tail) = v.data.split_at_mut(lo * n);
            let (a, b) = tail.split_at_mut((hi - lo) * n);
            a[..n].swap_with_slice(&mut b[..n]);
            let (_, tail) = av.data.split_at_mut(lo * n);
            let (a, b) = tail.split_at_mut((hi - lo) * n);
            a[..n].swap_with_slice(&mut b[..n]);
        }
    }
    let rank = kept.len();
    v.data.truncate(rank * n);
    v.cols = rank;
    av.data.truncate(rank * n);
    av.cols = rank;
    rank
}

fn split_two(data: &mut [Complex64], n: usize, i: usize, j: usize) -> (&[Complex64], &mut [Complex64]) {
    assert_ne!(i, j);
    if i < j {
        let (a, b) = data.split_at_mut(j * n);
        (&a[i * n..(i + 1) * n], &mut b[..n])
    } else {
        let (a, b) = data.split_at_mut(i * n);
        let ib = &b[..n];
        let jb = &mut a[j * n..(j + 1) * n];
        // SAFETY shim not needed: reborrow via raw split is avoided by ordering
        // (we only reach this branch with i > j; return immutable view of b)
        (ib, jb)
    }
}

/// Small dense complex matrix, column major.
#[derive(Debug, Clone)]
pub struct SmallMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl SmallMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[j * self.rows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[j * self.rows + i] = v;
    }

    /// Keep columns [0, k).
    pub fn first_cols(&self, k: usize) -> SmallMat {
        SmallMat {
            rows: self.rows,
            cols: k,
            data: self.data[..k * self.rows].to_vec(),
        }
    }

    /// Zero the first `k` rows (used to strip the X-component out of a
    /// Rayleigh-Ritz rotation when forming the conjugate-direction block).
    pub fn zero_first_rows(&self, k: usize) -> SmallMat {
        let mut out = self.clone();
        for j in 0..out.cols {
            for i in 0..k.min(out.rows) {
                out.data[j * out.rows + i] = Complex64::new(0.0, 0.0);
            }
        }
        out
    }
}

/// Eigendecomposition of a small Hermitian matrix by cyclic Jacobi with
/// complex rotations. Returns eigenvalues ascending and the unitary matrix of
/// eigenvectors (columns), so `a = v diag(w) v^H`.
pub fn hermitian_eigen(a: &SmallMat) -> (Vec<f64>, SmallMat) {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut m = a.clone();
    // enforce exact Hermitian symmetry of the work copy
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m.get(i, j) + m.get(j, i).conj());
            m.set(i, j, avg);
            m.set(j, i, avg.conj());
        }
        let d = m.get(i, i);
        m.set(i, i, Complex64::new(d.re, 0.0));
    }
    let mut v = SmallMat::zeros(n, n);
    for i in 0..n {
        v.set(i, i, Complex64::new(1.0, 0.0));
    }
    let fro: f64 = m.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let tol = f64::EPSILON * fro.max(f64::MIN_POSITIVE);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m.get(p, q).norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                let r = apq.norm();
                if r <= tol * 1e-3 {
                    continue;
                }
                let phase = apq / r;
                let app = m.get(p, p).re;
                let aqq = m.get(q, q).re;
                let tau = (aqq - app) / (2.0 * r);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sp = s * phase; // J[p][q] = sp, J[q][p] = -conj(sp), diag = c
                // update m <- J^H m J
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, mkp * c - mkq * sp.conj());
                    m.set(k, q, mkp * sp + mkq * c);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, mpk * c - mqk * sp);
                    m.set(q, k, mpk * sp.conj() + mqk * c);
                }
                // keep the diagonal exactly real
                let dp = m.get(p, p);
                m.set(p, p, Complex64::new(dp.re, 0.0));
                let dq = m.get(q, q);
                m.set(q, q, Complex64::new(dq.re, 0.0));
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp * c - vkq * sp.conj());
                    v.set(k, q, vkp * sp + vkq * c);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let evals: Vec<f64> = (0..n).map(|i| m.get(i, i).re).collect();
    order.sort_by(|&a, &b| evals[a].partial_cmp(&evals[b]).unwrap());
    let mut w = Vec::with_capacity(n);
    let mut vs = SmallMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        w.push(evals[src]);
        for i in 0..n {
            vs.set(i, dst, v.get(i, src));
        }
    }
    (w, vs)
}

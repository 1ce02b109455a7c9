//! Preconditioner for the strip eigensolve: the operator with curvature
//! frozen at the lattice origin is translation invariant in `s`, so it
//! block-diagonalizes over discrete momenta. Applying its shifted inverse
//! costs one FFT per `t`-row plus one real tridiagonal solve per momentum
//! mode.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::SolverError;
use crate::linalg::dense::ColMat;
use crate::linalg::lobpcg::Precond;
use crate::linalg::tridiag::PivotedTridiagLu;

use super::StripProblem;

pub struct FrozenStripPrecond {
    ns: usize,
    nt: usize,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// One factored transverse system per s-momentum mode.
    factors: Vec<PivotedTridiagLu>,
    /// Square root of the frozen weighted mass per `t`-row.
    mass_sqrt: Vec<f64>,
}

impl FrozenStripPrecond {
    /// Freeze κ at `kappa0` and factor `K₀ - shift·N₀` mode by mode.
    pub fn new(p: &StripProblem, kappa0: f64, shift: f64) -> Result<Self, SolverError> {
        let (ns, nt) = (p.ns, p.nt);
        let (ds, dt) = (p.ds(), p.dt());
        let h = p.h;
        let mass_t: Vec<f64> = (0..nt)
            .map(|j| {
                let wj = if j == 0 { 0.5 } else { 1.0 };
                (1.0 - p.t_node(j) * kappa0) * wj
            })
            .collect();
        if mass_t.iter().any(|&m| m <= 0.0) {
            return Err(SolverError::MetricDegenerate(
                mass_t.iter().cloned().fold(f64::INFINITY, f64::min),
            ));
        }
        // transverse stiffness (shared across modes)
        let mut diag_t = vec![0.0f64; nt];
        let mut off_t = vec![0.0f64; nt - 1];
        for j in 0..nt {
            let t_face = (j as f64 + 0.5) * dt;
            let c = (h / dt).powi(2) * (1.0 - t_face * kappa0);
            diag_t[j] += c;
            if j + 1 < nt {
                diag_t[j + 1] += c;
                off_t[j] = -c;
            }
        }
        // per-row hopping phase and weight of the frozen s-faces
        let theta_t: Vec<f64> = (0..nt)
            .map(|j| {
                let t = p.t_node(j);
                (-t * (1.0 - 0.5 * t * kappa0) + p.gauge_offset) * ds / h
            })
            .collect();
        // raw mode systems K₀ - σN₀; the N₀^{1/2} similarity happens outside
        let mut factors = Vec::with_capacity(ns);
        for m in 0..ns {
            let kds = 2.0 * std::f64::consts::PI * m as f64 / ns as f64;
            let mut d = vec![0.0f64; nt];
            for j in 0..nt {
                let wj = if j == 0 { 0.5 } else { 1.0 };
                let a_j = 1.0 - p.t_node(j) * kappa0;
                let x = 0.5 * (kds - theta_t[j]);
                let hop = 4.0 * (h / ds).powi(2) * wj / a_j * x.sin().powi(2);
                d[j] = diag_t[j] + hop - shift * mass_t[j];
            }
            if d.iter().any(|x| !x.is_finite()) {
                return Err(SolverError::FactorizationFailure(format!(
                    "non-finite transverse system in mode {m}"
                )));
            }
            factors.push(PivotedTridiagLu::factor(&off_t, &d, &off_t));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            ns,
            nt,
            fft: planner.plan_fft_forward(ns),
            ifft: planner.plan_fft_inverse(ns),
            factors,
            mass_sqrt: mass_t.iter().map(|m| m.sqrt()).collect(),
        })
    }

    fn apply_one(&self, r: &[Complex64], z: &mut [Complex64]) {
        let (ns, nt) = (self.ns, self.nt);
        debug_assert_eq!(r.len(), ns * nt);
        // z = N₀^{1/2} r, then FFT over s row by row
        for j in 0..nt {
            let w = self.mass_sqrt[j];
            for i in 0..ns {
                z[j * ns + i] = r[j * ns + i] * w;
            }
        }
        let mut scratch =
            vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        for j in 0..nt {
            self.fft
                .process_with_scratch(&mut z[j * ns..(j + 1) * ns], &mut scratch);
        }
        // transverse solve per mode
        let mut buf = vec![Complex64::new(0.0, 0.0); nt];
        for m in 0..ns {
            for j in 0..nt {
                buf[j] = z[j * ns + m];
            }
            self.factors[m].solve_complex(&mut buf);
            for j in 0..nt {
                z[j * ns + m] = buf[j];
            }
        }
        let mut scratch2 =
            vec![Complex64::new(0.0, 0.0); self.ifft.get_inplace_scratch_len()];
        let scale = 1.0 / ns as f64;
        for j in 0..nt {
            self.ifft
                .process_with_scratch(&mut z[j * ns..(j + 1) * ns], &mut scratch2);
        }
        for j in 0..nt {
            let w = self.mass_sqrt[j] * scale;
            for i in 0..ns {
                z[j * ns + i] *= w;
            }
        }
    }
}

impl Precond for FrozenStripPrecond {
    fn apply_block(&self, r: &ColMat, z: &mut ColMat) {
        assert_eq!(r.n, self.ns * self.nt);
        assert_eq!(r.cols, z.cols);
        for c in 0..r.cols {
            let rc = r.col(c).to_vec();
            self.apply_one(&rc, z.col_mut(c));
        }
    }
}

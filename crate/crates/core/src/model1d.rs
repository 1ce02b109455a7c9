//! The half-line Neumann family `H(ξ) = D_x² + (x+ξ)²` on `L²(ℝ₊)` and the
//! universal constants extracted from its ground state: the minimizing offset
//! `ξ₀`, the de Gennes constant `Θ₀ = μ(ξ₀) = ξ₀²`, the ground state `u₀`,
//! `C₁ = u₀(0)²/3`, the centered moments `M₀..M₃`, the regularized-resolvent
//! integral `I₂` and the curvature of `μ` at its minimum.
//!
//! Every quantity is computed on one shared finite-difference grid (ghost-node
//! Neumann stencil at `x = 0`, hard Dirichlet at `x = L`), so that the
//! identity network linking them is discretization-consistent. The suite of
//! identity residuals doubles as the correctness certificate.

use serde::Serialize;

use crate::error::ModelError;
use crate::linalg::tridiag::{deflated_pcg, PivotedTridiagLu, SymTridiag};

/// Identity tolerance at the reference grid; matches the O(dx²) error budget.
pub const TOL_ID: f64 = 1e-6;
/// Looser tolerance for finite-difference second-derivative cross-checks.
pub const TOL_FD: f64 = 1e-4;

/// Uniform grid on `[0, L]`: `n` nodes including both endpoints, Neumann
/// stencil at 0, Dirichlet at `L` (the last node is not an unknown).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfLineGrid {
    pub length: f64,
    pub n: usize,
}

impl HalfLineGrid {
    pub fn new(length: f64, n: usize) -> Self {
        assert!(length >= 8.0, "truncation length must be at least 8");
        assert!(n >= 256, "need at least 256 nodes");
        Self { length, n }
    }

    /// Reference resolution for the published constants.
    pub fn reference() -> Self {
        Self::new(12.0, 8192)
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.n - 1) as f64
    }

    /// Number of unknowns (all nodes except the Dirichlet endpoint).
    pub fn unknowns(&self) -> usize {
        self.n - 1
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Trapezoid weight of node `i` (half weight at the Neumann end).
    fn weight(&self, i: usize) -> f64 {
        if i == 0 {
            0.5
        } else {
            1.0
        }
    }

    /// Trapezoid quadrature of node samples over the unknowns.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.unknowns());
        let mut acc = 0.5 * f[0];
        for v in &f[1..] {
            acc += v;
        }
        acc * self.spacing()
    }
}

/// Symmetrized tridiagonal discretization of `D_x² + (x+ξ)²`.
///
/// The ghost-node Neumann row is unsymmetric; conjugating by
/// `diag(√w)` with the trapezoid weights `w = (1/2, 1, …)` restores symmetry
/// without changing the spectrum.
fn discretize(xi: f64, grid: &HalfLineGrid) -> SymTridiag {
    let n = grid.unknowns();
    let dx = grid.spacing();
    let inv = 1.0 / (dx * dx);
    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        let x = grid.node(i) + xi;
        diag.push(2.0 * inv + x * x);
    }
    let mut off = vec![-inv; n - 1];
    off[0] = -std::f64::consts::SQRT_2 * inv;
    SymTridiag::new(diag, off)
}

/// Lowest eigenpair of the half-line family at offset `ξ`.
#[derive(Debug, Clone)]
pub struct ModelEigenpair {
    pub xi: f64,
    pub mu: f64,
    /// Node samples over the unknowns, unit trapezoid norm, positive.
    pub u: Vec<f64>,
    pub u_at_0: f64,
}

/// Solve for the lowest eigenpair at offset `xi`.
pub fn solve_model(xi: f64, grid: &HalfLineGrid) -> Result<ModelEigenpair, ModelError> {
    if !xi.is_finite() {
        return Err(ModelError::NonConvergence(format!("offset xi = {xi} not finite")));
    }
    let tri = discretize(xi, grid);
    let mu_bisect = tri.smallest_eigenvalues(1)[0];
    let start = gaussian_start(xi, grid);
    let v = tri.eigenvector(mu_bisect, &start);
    // Rayleigh-quotient polish: bisection alone saturates at eps times the
    // spectral scale (~1/dx^2), not enough for the derivative identities
    let mu = tri.rayleigh_quotient(&v);
    // residual certificate
    let mut res = 0.0f64;
    let n = grid.unknowns();
    for i in 0..n {
        let mut y = (tri.diag[i] - mu) * v[i];
        if i > 0 {
            y += tri.off[i - 1] * v[i - 1];
        }
        if i + 1 < n {
            y += tri.off[i] * v[i + 1];
        }
        res += y * y;
    }
    let scale = tri.diag.iter().fold(0.0f64, |a, &d| a.max(d.abs()));
    if res.sqrt() > 1e-8 * scale {
        return Err(ModelError::NonConvergence(format!(
            "inverse iteration residual {:.3e} at xi = {xi}",
            res.sqrt()
        )));
    }
    // back to node values and trapezoid normalization
    let mut u: Vec<f64> = v;
    u[0] *= std::f64::consts::SQRT_2;
    let nrm2 = grid.integrate(&u.iter().map(|x| x * x).collect::<Vec<_>>());
    let inv = 1.0 / nrm2.sqrt();
    let sign = if u[0] < 0.0 { -inv } else { inv };
    u.iter_mut().for_each(|x| *x *= sign);
    let u_at_0 = u[0];
    Ok(ModelEigenpair { xi, mu, u, u_at_0 })
}

/// Like [`solve_model`] but with an a-posteriori Richardson error estimate
/// against a once-coarsened grid; errors out when the estimate exceeds `tol`.
pub fn solve_model_checked(
    xi: f64,
    grid: &HalfLineGrid,
    tol: f64,
) -> Result<ModelEigenpair, ModelError> {
    let fine = solve_model(xi, grid)?;
    let coarse_grid = HalfLineGrid::new(grid.length, (grid.n / 2).max(256));
    let coarse = solve_model(xi, &coarse_grid)?;
    let ratio = coarse_grid.spacing() / grid.spacing();
    let estimate = (fine.mu - coarse.mu).abs() / (ratio * ratio - 1.0);
    if estimate > tol {
        return Err(ModelError::GridTooCoarse { estimate, tol });
    }
    Ok(fine)
}

/// Exact eigenvalue derivative `μ'(ξ) = (μ - ξ²) u(0)²`; no finite
/// differencing of `μ` is involved.
pub fn mu_derivative(pair: &ModelEigenpair) -> f64 {
    (pair.mu - pair.xi * pair.xi) * pair.u_at_0 * pair.u_at_0
}

/// One row of the identity certificate.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityResidual {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
}

impl IdentityResidual {
    pub fn passes(&self) -> bool {
        self.residual.abs() <= self.tolerance
    }
}

/// All constants of the half-line model, with their identity certificate.
#[derive(Debug, Clone, Serialize)]
pub struct ModelConstants {
    pub grid: HalfLineGrid,
    pub theta0: f64,
    pub xi0: f64,
    /// Ground state at `ξ₀`, node-sampled over the unknowns.
    pub u0: Vec<f64>,
    pub c1: f64,
    /// Centered moments `M₀..M₃` of `u₀²`.
    pub moments: [f64; 4],
    /// Regularized resolvent integral.
    pub i2: f64,
    /// Finite-difference estimate of `μ''(ξ₀)`.
    pub mu2_at_xi0: f64,
    /// `E''(0) = 2(1 - 4 I₂)`.
    pub e2_at_0: f64,
    /// Second eigenvalue at `ξ₀`; certifies the spectral gap the regularized
    /// resolvent relies on.
    pub mu_second: f64,
    pub identities: Vec<IdentityResidual>,
}

fn gaussian_start(xi: f64, grid: &HalfLineGrid) -> Vec<f64> {
    let center = (-xi).max(0.0);
    (0..grid.unknowns())
        .map(|i| {
            let d = grid.node(i) - center;
            (-0.5 * d * d).exp()
        })
        .collect()
}

/// Lowest eigenvalue at offset `xi`, polished to machine precision.
fn mu_of(xi: f64, grid: &HalfLineGrid) -> f64 {
    discretize(xi, grid).smallest_eigenvalue_polished(&gaussian_start(xi, grid))
}

/// Locate `ξ₀` as the root of `g(ξ) = μ(ξ) - ξ²` (equivalent to `μ' = 0`) and
/// fill in everything derivable from the ground state alone.
pub fn find_xi0(grid: &HalfLineGrid, tol: f64) -> Result<ModelConstants, ModelError> {
    assert!(tol > 0.0);
    let g = |xi: f64| mu_of(xi, grid) - xi * xi;
    // bracket by scanning [-3, 0] at step 0.1
    let (mut lo, mut hi) = (f64::NAN, f64::NAN);
    let mut prev_xi = -3.0;
    let mut prev_g = g(prev_xi);
    let mut found = false;
    for k in 1..=30 {
        let xi = -3.0 + 0.1 * k as f64;
        let gv = g(xi);
        if prev_g * gv <= 0.0 && prev_g.is_finite() {
            lo = prev_xi;
            hi = xi;
            found = true;
            break;
        }
        prev_xi = xi;
        prev_g = gv;
    }
    if !found {
        return Err(ModelError::BracketingFailure { lo: -3.0, hi: 0.0 });
    }
    let xi0 = brent(&g, lo, hi, tol);
    let pair = solve_model(xi0, grid)?;
    let theta0 = pair.mu;
    let c1 = pair.u_at_0 * pair.u_at_0 / 3.0;
    let n = grid.unknowns();
    let mut moments = [0.0f64; 4];
    for (k, m) in moments.iter_mut().enumerate() {
        let f: Vec<f64> = (0..n)
            .map(|i| (grid.node(i) + xi0).powi(k as i32) * pair.u[i] * pair.u[i])
            .collect();
        *m = grid.integrate(&f);
    }
    let mu_second = discretize(xi0, grid).smallest_eigenvalues(2)[1];
    Ok(ModelConstants {
        grid: *grid,
        theta0,
        xi0,
        u0: pair.u,
        c1,
        moments,
        i2: f64::NAN,
        mu2_at_xi0: f64::NAN,
        e2_at_0: f64::NAN,
        mu_second,
        identities: Vec::new(),
    })
}

/// Apply the regularized resolvent: returns `g` with `P₀ g = f - ⟨u₀,f⟩u₀`
/// and `⟨u₀,g⟩ = 0`, where `P₀ = D² + (x+ξ₀)² - Θ₀` with Neumann at 0.
pub fn resolvent_apply(constants: &ModelConstants, f: &[f64]) -> Result<Vec<f64>, ModelError> {
    let grid = &constants.grid;
    let n = grid.unknowns();
    assert_eq!(f.len(), n);
    let dx = grid.spacing();
    let mut p0 = discretize(constants.xi0, grid);
    for d in p0.diag.iter_mut() {
        *d -= constants.theta0;
    }
    // symmetric-basis kernel vector and right-hand side: multiply node values
    // by sqrt(weight * dx) so Euclidean products equal trapezoid integrals
    let wsq: Vec<f64> = (0..n).map(|i| (grid.weight(i) * dx).sqrt()).collect();
    let v0: Vec<f64> = constants.u0.iter().zip(&wsq).map(|(u, w)| u * w).collect();
    let fsym: Vec<f64> = f.iter().zip(&wsq).map(|(x, w)| x * w).collect();
    let apply_a = |x: &[f64], y: &mut [f64]| {
        for i in 0..n {
            let mut acc = p0.diag[i] * x[i];
            if i > 0 {
                acc += p0.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += p0.off[i] * x[i + 1];
            }
            y[i] = acc;
        }
    };
    // preconditioner (P0 + 1)^-1: positive definite since the gap is ~2.7
    let mshift: Vec<f64> = p0.diag.iter().map(|d| d + 1.0).collect();
    let lu = PivotedTridiagLu::factor(&p0.off, &mshift, &p0.off);
    let apply_m = |x: &[f64], y: &mut [f64]| {
        y.copy_from_slice(x);
        lu.solve_real(y);
    };
    let y = deflated_pcg(&apply_a, &apply_m, &v0, &fsym, 1e-13, 500)
        .map_err(|res| ModelError::SingularSystem(format!("pcg stalled at residual {res:.3e}")))?;
    Ok(y.iter().zip(&wsq).map(|(yi, w)| yi / w).collect())
}

/// Compute `I₂ = ⟨(x+ξ₀)u₀, P₀⁻¹ (x+ξ₀)u₀⟩` and store it together with
/// `E''(0) = 2(1 - 4 I₂)`.
pub fn compute_i2(constants: &mut ModelConstants) -> Result<f64, ModelError> {
    let grid = constants.grid;
    let n = grid.unknowns();
    let f: Vec<f64> = (0..n)
        .map(|i| (grid.node(i) + constants.xi0) * constants.u0[i])
        .collect();
    let g = resolvent_apply(constants, &f)?;
    let integrand: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a * b).collect();
    let i2 = grid.integrate(&integrand);
    constants.i2 = i2;
    constants.e2_at_0 = 2.0 * (1.0 - 4.0 * i2);
    Ok(i2)
}

/// Overlap integrals entering the `h^{1/2}`-order reduction, evaluated by
/// quadrature against their closed forms:
/// `I₁,₁ = C₁/2`, `I₁,₂ = -(3/2)C₁`, `I₁,₁ + I₁,₂ = -C₁`.
pub fn overlap_residuals(constants: &ModelConstants) -> Vec<IdentityResidual> {
    let grid = constants.grid;
    let n = grid.unknowns();
    let xi0 = constants.xi0;
    let u = &constants.u0;
    let f11: Vec<f64> = (0..n)
        .map(|i| {
            let x = grid.node(i);
            let y = x + xi0;
            (2.0 * x * y * y - x * x * y) * u[i] * u[i]
        })
        .collect();
    let i11 = grid.integrate(&f11);
    // I₁,₂ = i ∫ u₀ D u₀ = ∫ u₀ u₀' ; centered derivative, one-sided at the ends
    let dx = grid.spacing();
    let mut du = vec![0.0; n];
    du[0] = (u[1] - u[0]) / dx - 0.5 * (u[2] - 2.0 * u[1] + u[0]) / dx; // second-order one-sided
    for i in 1..n - 1 {
        du[i] = (u[i + 1] - u[i - 1]) / (2.0 * dx);
    }
    du[n - 1] = (u[n - 1] - u[n - 2]) / dx;
    let f12: Vec<f64> = (0..n).map(|i| u[i] * du[i]).collect();
    let i12 = grid.integrate(&f12);
    let c1 = constants.c1;
    let rows = vec![
        IdentityResidual {
            name: "overlap_i11_half_c1",
            residual: i11 - 0.5 * c1,
            tolerance: TOL_ID,
        },
        IdentityResidual {
            name: "overlap_i12_neg_three_half_c1",
            residual: i12 + 1.5 * c1,
            tolerance: TOL_ID,
        },
        IdentityResidual {
            name: "overlap_sum_neg_c1",
            residual: i11 + i12 + c1,
            tolerance: TOL_ID,
        },
    ];
    rows
}

/// Gate form of [`overlap_residuals`]: errors on the first violated identity.
pub fn check_overlap_identities(
    constants: &ModelConstants,
) -> Result<Vec<IdentityResidual>, ModelError> {
    let rows = overlap_residuals(constants);
    for row in &rows {
        if !row.passes() {
            return Err(ModelError::IdentityViolation {
                name: row.name,
                residual: row.residual,
                tol: row.tolerance,
            });
        }
    }
    Ok(rows)
}

/// Five-point finite-difference estimate of `μ''(ξ₀)` on the given grid.
pub fn estimate_mu_second_derivative(grid: &HalfLineGrid, xi0: f64) -> f64 {
    let delta = 0.025;
    let mus: Vec<f64> = (-2..=2).map(|k| mu_of(xi0 + k as f64 * delta, grid)).collect();
    (-mus[4] + 16.0 * mus[3] - 30.0 * mus[2] + 16.0 * mus[1] - mus[0]) / (12.0 * delta * delta)
}

impl ModelConstants {
    /// Full pipeline: locate `ξ₀`, extract every constant, and assemble the
    /// identity certificate.
    pub fn compute(grid: &HalfLineGrid) -> Result<Self, ModelError> {
        let mut c = find_xi0(grid, 1e-12)?;
        compute_i2(&mut c)?;
        c.mu2_at_xi0 = estimate_mu_second_derivative(grid, c.xi0);
        let u00 = c.u0[0];
        let overlaps = overlap_residuals(&c);
        let mut identities = vec![
            IdentityResidual {
                name: "theta0_equals_xi0_squared",
                residual: c.theta0 - c.xi0 * c.xi0,
                tolerance: TOL_ID,
            },
            IdentityResidual {
                name: "moment1_vanishes",
                residual: c.moments[1],
                tolerance: TOL_ID,
            },
            IdentityResidual {
                name: "moment2_half_theta0",
                residual: c.moments[2] - 0.5 * c.theta0,
                tolerance: TOL_ID,
            },
            IdentityResidual {
                name: "moment3_sixth_u0_sq",
                residual: c.moments[3] - u00 * u00 / 6.0,
                tolerance: TOL_ID,
            },
            IdentityResidual {
                name: "overlap_sum_neg_c1",
                residual: overlaps[2].residual,
                tolerance: TOL_ID,
            },
            IdentityResidual {
                name: "resolvent_second_perturbation",
                residual: (1.0 - 4.0 * c.i2) - 3.0 * c.c1 * c.theta0.sqrt(),
                tolerance: TOL_ID,
            },
            IdentityResidual {
                name: "mu_second_derivative",
                residual: c.mu2_at_xi0 - (-2.0 * c.xi0 * u00 * u00),
                tolerance: TOL_ID,
            },
        ];
        identities.extend(overlaps.into_iter().take(2));
        c.identities = identities;
        Ok(c)
    }

    /// Linear interpolation of `u₀` at abscissa `x` (zero beyond the grid).
    pub fn u0_at(&self, x: f64) -> f64 {
        if x < 0.0 {
            return self.u0[0];
        }
        let dx = self.grid.spacing();
        let pos = x / dx;
        let i = pos.floor() as usize;
        if i + 1 >= self.u0.len() {
            return 0.0;
        }
        let frac = pos - i as f64;
        self.u0[i] * (1.0 - frac) + self.u0[i + 1] * frac
    }

    pub fn all_identities_pass(&self) -> bool {
        self.identities.iter().all(IdentityResidual::passes)
    }

    /// JSON document with constants and the residual table.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema_version": 1,
            "theta0": self.theta0,
            "xi0": self.xi0,
            "C1": self.c1,
            "M": self.moments,
            "I2": self.i2,
            "mu2_at_xi0": self.mu2_at_xi0,
            "E2_at_0": self.e2_at_0,
            "grid": {"length": self.grid.length, "n": self.grid.n},
            "identities": self.identities,
        })
    }

    /// Two-column CSV of the ground state samples.
    pub fn write_eigenfunction_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,u0")?;
        for i in 0..self.u0.len() {
            writeln!(w, "{:.12e},{:.12e}", self.grid.node(i), self.u0[i])?;
        }
        Ok(())
    }
}

/// Classic Brent root finder on a bracketing interval.
fn brent(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    let mut fb = f(b);
    assert!(fa * fb <= 0.0, "root not bracketed");
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut mflag = true;
    for _ in 0..200 {
        if fb == 0.0 || (b - a).abs() < tol {
            return b;
        }
        let mut s = if fa != fc && fb != fc {
            // inverse quadratic interpolation
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let cond = !((lo.min(b) < s && s < lo.max(b))
            && !(mflag && (s - b).abs() >= (b - c).abs() / 2.0)
            && !(!mflag && (s - b).abs() >= (c - d).abs() / 2.0)
            && !(mflag && (b - c).abs() < tol)
            && !(!mflag && (c - d).abs() < tol));
        if cond {
            s = 0.5 * (a + b);
            mflag = true;
        } else {
            mflag = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa * fs < 0.0 {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn coarse() -> HalfLineGrid {
        HalfLineGrid::new(10.0, 2048)
    }

    #[test]
    fn xi_zero_reproduces_harmonic_oscillator() {
        // Neumann at 0 with xi = 0 is the even half of the full-line
        // oscillator: ground energy exactly 1.
        let pair = solve_model(0.0, &coarse()).unwrap();
        assert_abs_diff_eq!(pair.mu, 1.0, epsilon = 2e-6);
    }

    #[test]
    fn deep_well_forgets_the_boundary() {
        let grid = HalfLineGrid::new(20.0, 8192);
        let pair = solve_model(-10.0, &grid).unwrap();
        assert_abs_diff_eq!(pair.mu, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn derivative_formula_matches_finite_differences() {
        let grid = coarse();
        let xi = -0.5;
        let exact = mu_derivative(&solve_model(xi, &grid).unwrap());
        let d = 1e-4;
        let fd = (mu_of(xi + d, &grid) - mu_of(xi - d, &grid)) / (2.0 * d);
        assert_abs_diff_eq!(exact, fd, epsilon = 1e-5);
    }

    #[test]
    fn derivative_vanishes_when_mu_equals_xi_squared() {
        let xi = -0.7f64;
        let pair = ModelEigenpair {
            xi,
            mu: xi * xi,
            u: vec![],
            u_at_0: 0.9,
        };
        assert_eq!(mu_derivative(&pair), 0.0);
    }

    #[test]
    fn find_xi0_matches_reference_values() {
        // Oracle: Richardson-extrapolated fine-grid computation,
        // cross-checked against theta0 = xi0^2.
        let c = find_xi0(&coarse(), 1e-12).unwrap();
        assert!(c.xi0 < 0.0);
        assert_abs_diff_eq!(c.xi0, -0.7681836532, epsilon = 5e-6);
        assert_abs_diff_eq!(c.theta0, 0.5901061259, epsilon = 5e-6);
        assert_abs_diff_eq!(c.c1, 0.2540680955, epsilon = 5e-6);
        assert_abs_diff_eq!(c.moments[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.moments[1], 0.0, epsilon = 3e-6);
    }

    #[test]
    fn richardson_check_flags_coarse_grids() {
        let err = solve_model_checked(-0.7, &HalfLineGrid::new(8.0, 512), 1e-10).unwrap_err();
        assert!(matches!(err, ModelError::GridTooCoarse { .. }));
        assert!(solve_model_checked(-0.7, &coarse(), 1e-4).is_ok());
    }

    #[test]
    fn resolvent_annihilates_u0_and_is_linear() {
        let mut c = find_xi0(&coarse(), 1e-12).unwrap();
        compute_i2(&mut c).unwrap();
        let g0 = resolvent_apply(&c, &c.u0).unwrap();
        let norm = c.grid.integrate(&g0.iter().map(|x| x * x).collect::<Vec<_>>());
        assert!(norm.sqrt() < 1e-9, "resolvent of u0 has norm {}", norm.sqrt());
        let zero = resolvent_apply(&c, &vec![0.0; c.grid.unknowns()]).unwrap();
        assert!(zero.iter().all(|&x| x.abs() < 1e-14));
    }

    #[test]
    fn resolvent_output_is_orthogonal_for_rough_input() {
        let c = find_xi0(&coarse(), 1e-12).unwrap();
        let n = c.grid.unknowns();
        // deterministic wiggly input
        let f: Vec<f64> = (0..n).map(|i| ((i * i) as f64 * 0.013).sin()).collect();
        let g = resolvent_apply(&c, &f).unwrap();
        let inner: Vec<f64> = g.iter().zip(&c.u0).map(|(a, b)| a * b).collect();
        let fn2: Vec<f64> = f.iter().map(|x| x * x).collect();
        let fnorm = c.grid.integrate(&fn2).sqrt();
        assert!(c.grid.integrate(&inner).abs() <= 1e-10 * fnorm);
    }

    #[test]
    fn second_perturbation_identity_two_routes() {
        // route 1: quadrature of the resolvent; route 2: 6 C1 sqrt(theta0)
        let mut c = find_xi0(&coarse(), 1e-12).unwrap();
        compute_i2(&mut c).unwrap();
        let lhs = 2.0 * (1.0 - 4.0 * c.i2);
        let rhs = 6.0 * c.c1 * c.theta0.sqrt();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-5);
        assert!(c.i2 < 0.25);
        assert_abs_diff_eq!(c.i2, 0.25 - 0.75 * c.c1 * c.theta0.sqrt(), epsilon = 1e-5);
    }

    #[test]
    fn ground_state_decays_and_mu_is_monotone_around_xi0() {
        let c = find_xi0(&coarse(), 1e-12).unwrap();
        // Gaussian-type decay: |u0| e^{x^2/4} stays bounded on the tail
        let dx = c.grid.spacing();
        let mut bound: f64 = 0.0;
        for i in 0..c.grid.unknowns() {
            let x = i as f64 * dx;
            if x >= 8.0 {
                bound = bound.max(c.u0[i].abs() * (x * x / 4.0).exp());
            }
        }
        assert!(bound < 1.0, "tail bound {}", bound);
        // monotone on both sides of the minimum (sample lattice)
        let grid = coarse();
        let mut prev = mu_of(-3.0, &grid);
        let mut xi = -3.0;
        while xi < c.xi0 - 0.15 {
            xi += 0.15;
            let m = mu_of(xi, &grid);
            assert!(m < prev);
            prev = m;
        }
        let mut prev = mu_of(c.xi0 + 0.05, &grid);
        let mut xi = c.xi0 + 0.05;
        while xi < -0.05 {
            xi += 0.15;
            let m = mu_of(xi, &grid);
            assert!(m > prev);
            prev = m;
        }
    }

    #[test]
    fn overlap_identities_hold_on_moderate_grid() {
        let c = find_xi0(&HalfLineGrid::new(12.0, 4096), 1e-12).unwrap();
        let rows = check_overlap_identities(&c).unwrap();
        for r in &rows {
            assert!(r.passes(), "{} residual {:.2e}", r.name, r.residual);
        }
    }

    #[test]
    fn variational_moment_table() {
        // The four moment integrals used by the trial-energy bookkeeping.
        let c = find_xi0(&HalfLineGrid::new(12.0, 4096), 1e-12).unwrap();
        let g = c.grid;
        let n = g.unknowns();
        let u = &c.u0;
        let q = |f: &dyn Fn(usize) -> f64| {
            let v: Vec<f64> = (0..n).map(f).collect();
            g.integrate(&v)
        };
        let th = c.theta0;
        let tol = 1e-5;
        assert_abs_diff_eq!(q(&|i| g.node(i) * u[i] * u[i]), th.sqrt(), epsilon = tol);
        assert_abs_diff_eq!(
            q(&|i| {
                let y = g.node(i) + c.xi0;
                g.node(i) * y * y * u[i] * u[i]
            }),
            0.5 * (c.c1 + th.powf(1.5)),
            epsilon = tol
        );
        assert_abs_diff_eq!(
            q(&|i| {
                let y = g.node(i) + c.xi0;
                g.node(i) * g.node(i) * y * u[i] * u[i]
            }),
            0.5 * c.c1 + th.powf(1.5),
            epsilon = tol
        );
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

            /// The boundary-value derivative formula agrees with finite
            /// differences of the eigenvalue everywhere on the offset axis.
            #[test]
            fn derivative_formula_everywhere(xi in -2.0f64..-0.1) {
                let grid = HalfLineGrid::new(9.0, 1024);
                let exact = mu_derivative(&solve_model(xi, &grid).unwrap());
                let d = 1e-4;
                let fd = (mu_of(xi + d, &grid) - mu_of(xi - d, &grid)) / (2.0 * d);
                prop_assert!((exact - fd).abs() < 1e-4, "xi {}: {} vs {}", xi, exact, fd);
            }

            /// The resolvent output is orthogonal to the ground state for
            /// arbitrary smooth right-hand sides.
            #[test]
            fn resolvent_orthogonality(freq in 0.2f64..4.0, phase in 0.0f64..std::f64::consts::TAU) {
                let grid = HalfLineGrid::new(9.0, 1024);
                let c = find_xi0(&grid, 1e-10).unwrap();
                let n = grid.unknowns();
                let f: Vec<f64> = (0..n)
                    .map(|i| (freq * grid.node(i) + phase).sin() * (-0.1 * grid.node(i)).exp())
                    .collect();
                let g = resolvent_apply(&c, &f).unwrap();
                let inner: Vec<f64> = g.iter().zip(&c.u0).map(|(a, b)| a * b).collect();
                let fn2: Vec<f64> = f.iter().map(|x| x * x).collect();
                let fnorm = c.grid.integrate(&fn2).sqrt();
                prop_assert!(c.grid.integrate(&inner).abs() <= 1e-10 * fnorm);
            }
        }
    }

    #[test]
    fn full_constants_pipeline_has_passing_certificate() {
        let c = ModelConstants::compute(&HalfLineGrid::new(12.0, 4096)).unwrap();
        for id in &c.identities {
            // moderate grid: allow 4x the reference budget
            assert!(
                id.residual.abs() <= 4.0 * id.tolerance,
                "{}: {:.3e}",
                id.name,
                id.residual
            );
        }
        assert!(c.mu_second - c.theta0 > 2.0, "model gap {}", c.mu_second - c.theta0);
    }
}

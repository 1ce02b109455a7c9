//! Error types, one enum per subsystem.

use thiserror::Error;

/// Failures of the half-line model solver and its constant extraction.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("eigensolver failed to converge: {0}")]
    NonConvergence(String),
    #[error("grid too coarse: Richardson error estimate {estimate:.3e} exceeds tolerance {tol:.3e}")]
    GridTooCoarse { estimate: f64, tol: f64 },
    #[error("no sign change of mu(xi) - xi^2 found while scanning [{lo}, {hi}]")]
    BracketingFailure { lo: f64, hi: f64 },
    #[error("deflated resolvent system is numerically singular ({0})")]
    SingularSystem(String),
    #[error("identity '{name}' violated: residual {residual:.3e} exceeds {tol:.3e}")]
    IdentityViolation {
        name: &'static str,
        residual: f64,
        tol: f64,
    },
}

/// Failures of boundary-curve processing.
#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("curve is not simple: self-intersection near parameters {0:.4} and {1:.4}")]
    NotSimpleCurve(f64, f64),
    #[error("curve data not smooth enough: {0}")]
    NonSmooth(String),
    #[error("curvature maximum is degenerate (k2 = {k2:.3e} below floor {floor:.3e})")]
    DegenerateMaximum { k2: f64, floor: f64 },
    #[error("curvature attains its maximum at inequivalent points {0:.4} and {1:.4}")]
    MultipleMaxima(f64, f64),
    #[error("strip depth {t0} reaches the focal set: must be below 1/k_max = {limit:.4}")]
    StripTooDeep { t0: f64, limit: f64 },
}

/// Failures of the closed-form expansion evaluators.
#[derive(Debug, Error)]
pub enum EffectiveError {
    #[error("geometry is degenerate (k2 = {0:.3e}); the expansion hypotheses fail")]
    DegenerateGeometry(f64),
    #[error("disc bound requires b R^2 / h >= {threshold}, got {value:.3}")]
    ThresholdViolation { value: f64, threshold: f64 },
}

/// Failures of the two-dimensional eigensolvers.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("grid resolution inadequate: {0}")]
    ResolutionTooCoarse(String),
    #[error("strip metric degenerates: 1 - t0*kappa = {0:.3e} <= 0")]
    MetricDegenerate(f64),
    #[error("preconditioner factorization failed: {0}")]
    FactorizationFailure(String),
    #[error("eigensolver did not reach tolerance {tol:.1e} in {iterations} iterations (worst residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        tol: f64,
    },
    #[error("angular window [{lo}, {hi}] too narrow: minimizing sector m = {argmin} touches the edge")]
    WindowTooNarrow { lo: i64, hi: i64, argmin: i64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Failures of the sweep/report layer.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("empty h-list")]
    EmptySweep,
    #[error("fit ill-conditioned: h-range spans factor {0:.2} < 3")]
    FitIllConditioned(f64),
    #[error("trial-state cutoffs clip {clipped:.3e} of the mass (limit {limit:.1e})")]
    SupportClipped { clipped: f64, limit: f64 },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Effective(#[from] EffectiveError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

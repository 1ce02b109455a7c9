//! Numerical toolkit for the low-lying spectrum of the two-dimensional
//! magnetic Neumann Laplacian `(-ih∇ - A)²` with constant field on smooth
//! bounded domains.
//!
//! The crate has two halves that validate each other:
//!
//! * closed-form machinery — the half-line model family `D_x² + (x+ξ)²` and
//!   its universal constants ([`model1d`]), boundary geometry and curvature
//!   data ([`geometry`]), and the semiclassical eigenvalue expansions built
//!   from them ([`effective`]);
//! * direct computation — a sparse eigensolver for the operator in
//!   boundary-strip coordinates and an exact radial reduction for discs
//!   ([`solver2d`]), orchestrated into h-sweeps, coefficient fits and trial
//!   state evaluations by [`harness`].
//!
//! All solvers are deterministic: no randomness enters anywhere, so repeated
//! runs with the same inputs produce identical output bytes.

pub mod effective;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod model1d;
pub mod solver2d;

pub use effective::{ExpansionCoefficients, HarmonicLevels};
pub use error::{EffectiveError, GeometryError, HarnessError, ModelError, SolverError};
pub use geometry::{CurvatureProfile, ParametricBoundary, StripMetric};
pub use harness::{GridPolicy, SweepReport};
pub use model1d::{HalfLineGrid, ModelConstants, ModelEigenpair};
pub use solver2d::{DiscProblem, SpectralResult, StripProblem};

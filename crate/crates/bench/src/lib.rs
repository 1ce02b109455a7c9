//! Shared fixtures for the benchmark targets.

use magspec_core::geometry::{analyze_boundary, CurvatureProfile, ParametricBoundary};
use magspec_core::model1d::{find_xi0, HalfLineGrid, ModelConstants};

pub fn bench_constants() -> ModelConstants {
    find_xi0(&HalfLineGrid::new(10.0, 2048), 1e-12).expect("model constants")
}

pub fn bench_ellipse() -> CurvatureProfile {
    analyze_boundary(&ParametricBoundary::ellipse(2.0, 1.0).with_samples(1024)).expect("ellipse")
}

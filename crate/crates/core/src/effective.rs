//! Closed-form spectral predictions: the truncated eigenvalue expansion
//! through order `h^{7/4}`, the spectral-gap coefficient, the variational
//! three-term upper bound with its optimal Gaussian width, the effective
//! harmonic-oscillator levels, and the disc lower bound.

use serde::Serialize;

use crate::error::EffectiveError;
use crate::geometry::CurvatureProfile;
use crate::model1d::ModelConstants;

/// Per-order coefficients of the eigenvalue expansion
/// `μ⁽ⁿ⁾(h) ≈ Θ₀ h - k_max C₁ h^{3/2} + c₇₄(n) h^{7/4}`, with
/// `c₇₄(n) = C₁ Θ₀^{1/4} √(3k₂/2) (2n-1)`, truncated at `h^{7/4}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExpansionCoefficients {
    pub theta0: f64,
    pub c1: f64,
    pub k_max: f64,
    pub k2: f64,
    /// Coefficient of `h^{3/2}` (negative for bounded domains).
    pub c_32: f64,
    /// `c₇₄(n) = c74_base · (2n-1)`.
    pub c74_base: f64,
    /// Variational `h^{7/4}` coefficient `√(k₂C₁/2)` (strictly larger).
    pub var_74: f64,
    /// Truncation marker carried into every evaluation record.
    pub order: &'static str,
}

/// Order marker attached to all expansion output.
pub const ORDER_H74: &str = "h^(7/4)";

impl ExpansionCoefficients {
    pub fn from_raw(theta0: f64, c1: f64, k_max: f64, k2: f64) -> Result<Self, EffectiveError> {
        if k2 <= 0.0 {
            return Err(EffectiveError::DegenerateGeometry(k2));
        }
        Ok(Self {
            theta0,
            c1,
            k_max,
            k2,
            c_32: -k_max * c1,
            c74_base: c1 * theta0.powf(0.25) * (1.5 * k2).sqrt(),
            var_74: (0.5 * k2 * c1).sqrt(),
            order: ORDER_H74,
        })
    }

    pub fn new(mc: &ModelConstants, cp: &CurvatureProfile) -> Result<Self, EffectiveError> {
        let max = cp
            .require_max()
            .map_err(|_| EffectiveError::DegenerateGeometry(0.0))?;
        Self::from_raw(mc.theta0, mc.c1, max.k_max, max.k2)
    }

    /// `c₇₄(n)`, strictly increasing in the level index `n ≥ 1`.
    pub fn c74(&self, n: usize) -> f64 {
        assert!(n >= 1);
        self.c74_base * (2 * n - 1) as f64
    }

    /// Truncated expansion of the n-th eigenvalue.
    pub fn eigenvalue(&self, n: usize, h: f64) -> f64 {
        self.theta0 * h + self.c_32 * h.powf(1.5) + self.c74(n) * h.powf(1.75)
    }

    /// Gap coefficient: `Δ(h) ≈ C₁ Θ₀^{1/4} √(6k₂) h^{7/4}`.
    pub fn gap_coefficient(&self) -> f64 {
        2.0 * self.c74_base
    }

    pub fn gap(&self, h: f64) -> f64 {
        self.gap_coefficient() * h.powf(1.75)
    }

    /// Variational bound `Θ₀h - k_max C₁ h^{3/2} + √(k₂C₁/2) h^{7/4}` and the
    /// optimal Gaussian width `α = √(k₂C₁/8)`.
    pub fn variational_bound(&self, h: f64) -> (f64, f64) {
        let bound = self.theta0 * h + self.c_32 * h.powf(1.5) + self.var_74 * h.powf(1.75);
        let alpha_opt = (self.k2 * self.c1 / 8.0).sqrt();
        (bound, alpha_opt)
    }
}

/// Evaluate the truncated expansion of the n-th eigenvalue.
pub fn eigenvalue_expansion(
    n: usize,
    h: f64,
    mc: &ModelConstants,
    cp: &CurvatureProfile,
) -> Result<f64, EffectiveError> {
    assert!(h > 0.0);
    Ok(ExpansionCoefficients::new(mc, cp)?.eigenvalue(n, h))
}

/// Evaluate the gap expansion `Δ(h)`.
pub fn gap_expansion(h: f64, mc: &ModelConstants, cp: &CurvatureProfile) -> Result<f64, EffectiveError> {
    Ok(ExpansionCoefficients::new(mc, cp)?.gap(h))
}

/// Evaluate the variational bound and its optimal width.
pub fn variational_bound(
    h: f64,
    mc: &ModelConstants,
    cp: &CurvatureProfile,
) -> Result<(f64, f64), EffectiveError> {
    Ok(ExpansionCoefficients::new(mc, cp)?.variational_bound(h))
}

/// Levels of the effective harmonic oscillator
/// `H = A D_σ² + B σ²` with `A = 3C₁√Θ₀`, `B = C₁k₂/2`:
/// `e_ℓ = √(AB) (2ℓ+1) = C₁ Θ₀^{1/4} √(3k₂/2) (2ℓ+1)`.
#[derive(Debug, Clone, Serialize)]
pub struct HarmonicLevels {
    /// Kinetic coefficient `A = 3C₁√Θ₀`.
    pub a_coef: f64,
    /// Potential coefficient `B = C₁k₂/2`.
    pub b_coef: f64,
    pub levels: Vec<f64>,
}

pub fn harmonic_levels(
    count: usize,
    mc: &ModelConstants,
    cp: &CurvatureProfile,
) -> Result<HarmonicLevels, EffectiveError> {
    let co = ExpansionCoefficients::new(mc, cp)?;
    Ok(harmonic_levels_raw(count, co.theta0, co.c1, co.k2))
}

pub fn harmonic_levels_raw(count: usize, theta0: f64, c1: f64, k2: f64) -> HarmonicLevels {
    let a_coef = 3.0 * c1 * theta0.sqrt();
    let b_coef = 0.5 * c1 * k2;
    let omega = (a_coef * b_coef).sqrt();
    let levels = (0..count).map(|l| omega * (2 * l + 1) as f64).collect();
    HarmonicLevels {
        a_coef,
        b_coef,
        levels,
    }
}

/// Parameters of the disc lower bound that the source leaves unquantified:
/// the validity threshold on `bR²/h` and the `h²` remainder constant. Both
/// are echoed with every evaluation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiscBoundParams {
    pub threshold: f64,
    pub c_rem: f64,
}

impl Default for DiscBoundParams {
    fn default() -> Self {
        Self {
            threshold: 10.0,
            c_rem: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiscLowerBound {
    pub value: f64,
    pub params: DiscBoundParams,
}

/// Lower bound for the disc of radius `R` with field strength `b`:
/// `Θ₀ b h - C₁ b^{1/2} h^{3/2}/R - C_rem h²/R²`, valid for `bR²/h` above the
/// threshold.
pub fn disc_lower_bound(
    h: f64,
    b: f64,
    radius: f64,
    mc: &ModelConstants,
    params: DiscBoundParams,
) -> Result<DiscLowerBound, EffectiveError> {
    let ratio = b * radius * radius / h;
    if ratio < params.threshold {
        return Err(EffectiveError::ThresholdViolation {
            value: ratio,
            threshold: params.threshold,
        });
    }
    let value = mc.theta0 * b * h - mc.c1 * b.sqrt() * h.powf(1.5) / radius
        - params.c_rem * h * h / (radius * radius);
    Ok(DiscLowerBound { value, params })
}

/// One CSV/JSON record of an expansion evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionRecord {
    pub h: f64,
    pub n: usize,
    pub value: f64,
    pub order_marker: &'static str,
}

pub fn expansion_table(
    levels: usize,
    h_list: &[f64],
    mc: &ModelConstants,
    cp: &CurvatureProfile,
) -> Result<Vec<ExpansionRecord>, EffectiveError> {
    let co = ExpansionCoefficients::new(mc, cp)?;
    let mut out = Vec::with_capacity(levels * h_list.len());
    for &h in h_list {
        for n in 1..=levels {
            out.push(ExpansionRecord {
                h,
                n,
                value: co.eigenvalue(n, h),
                order_marker: co.order,
            });
        }
    }
    Ok(out)
}

pub fn write_expansion_csv<W: std::io::Write>(
    records: &[ExpansionRecord],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "h,n,value,order_marker")?;
    for r in records {
        writeln!(w, "{:.12e},{},{:.12e},{}", r.h, r.n, r.value, r.order_marker)?;
    }
    Ok(())
}

//! Smooth closed boundary curves: arc-length parametrization, curvature
//! `κ(s)`, location and non-degeneracy data of the curvature maximum, and the
//! tubular-strip metric entering the boundary-coordinate operator.

use std::sync::Arc;

use crate::error::GeometryError;

const K2_FLOOR: f64 = 1e-6;
const TIE_TOL: f64 = 1e-9;

/// Point evaluator for a custom curve: `θ ∈ [0, 2π) → (x, y)`.
pub type PointFn = Arc<dyn Fn(f64) -> [f64; 2] + Send + Sync>;

#[derive(Clone)]
pub enum CurveKind {
    Circle { r: f64 },
    Ellipse { a: f64, b: f64 },
    Custom(PointFn),
}

impl std::fmt::Debug for CurveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CurveKind::Circle { r } => write!(f, "Circle {{ r: {r} }}"),
            CurveKind::Ellipse { a, b } => write!(f, "Ellipse {{ a: {a}, b: {b} }}"),
            CurveKind::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// A closed positively oriented boundary curve plus the sampling resolution
/// used when building its curvature profile.
#[derive(Debug, Clone)]
pub struct ParametricBoundary {
    pub kind: CurveKind,
    pub samples: usize,
}

impl ParametricBoundary {
    pub fn circle(r: f64) -> Self {
        assert!(r > 0.0);
        Self {
            kind: CurveKind::Circle { r },
            samples: 4096,
        }
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        assert!(a > 0.0 && b > 0.0);
        Self {
            kind: CurveKind::Ellipse { a, b },
            samples: 4096,
        }
    }

    pub fn custom(point: PointFn) -> Self {
        Self {
            kind: CurveKind::Custom(point),
            samples: 4096,
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        assert!(samples >= 64);
        self.samples = samples;
        self
    }

    pub fn point(&self, theta: f64) -> [f64; 2] {
        match &self.kind {
            CurveKind::Circle { r } => [r * theta.cos(), r * theta.sin()],
            CurveKind::Ellipse { a, b } => [a * theta.cos(), b * theta.sin()],
            CurveKind::Custom(f) => f(theta),
        }
    }

    fn velocity(&self, theta: f64) -> [f64; 2] {
        match &self.kind {
            CurveKind::Circle { r } => [-r * theta.sin(), r * theta.cos()],
            CurveKind::Ellipse { a, b } => [-a * theta.sin(), b * theta.cos()],
            CurveKind::Custom(f) => {
                // fourth-order central differences; the step balances the
                // h^4 truncation against subtractive roundoff (~eps/h^2)
                let h = 1e-3;
                let (pm2, pm1, pp1, pp2) =
                    (f(theta - 2.0 * h), f(theta - h), f(theta + h), f(theta + 2.0 * h));
                [
                    (pm2[0] - 8.0 * pm1[0] + 8.0 * pp1[0] - pp2[0]) / (12.0 * h),
                    (pm2[1] - 8.0 * pm1[1] + 8.0 * pp1[1] - pp2[1]) / (12.0 * h),
                ]
            }
        }
    }

    fn acceleration(&self, theta: f64) -> [f64; 2] {
        match &self.kind {
            CurveKind::Circle { r } => [-r * theta.cos(), -r * theta.sin()],
            CurveKind::Ellipse { a, b } => [-a * theta.cos(), -b * theta.sin()],
            CurveKind::Custom(f) => {
                let h = 1e-3;
                let (pm2, pm1, p0, pp1, pp2) = (
                    f(theta - 2.0 * h),
                    f(theta - h),
                    f(theta),
                    f(theta + h),
                    f(theta + 2.0 * h),
                );
                [
                    (-pm2[0] + 16.0 * pm1[0] - 30.0 * p0[0] + 16.0 * pp1[0] - pp2[0])
                        / (12.0 * h * h),
                    (-pm2[1] + 16.0 * pm1[1] - 30.0 * p0[1] + 16.0 * pp1[1] - pp2[1])
                        / (12.0 * h * h),
                ]
            }
        }
    }

    fn speed(&self, theta: f64) -> f64 {
        let v = self.velocity(theta);
        v[0].hypot(v[1])
    }

    /// Signed curvature at parameter `theta` (positive for counterclockwise
    /// convex arcs).
    pub fn curvature_theta(&self, theta: f64) -> f64 {
        let v = self.velocity(theta);
        let a = self.acceleration(theta);
        let sp = v[0].hypot(v[1]);
        (v[0] * a[1] - v[1] * a[0]) / (sp * sp * sp)
    }
}

/// Cumulative arc length on a uniform `θ` grid.
#[derive(Debug, Clone)]
struct ArcTable {
    /// `s` at `θ_k = 2πk/m`, `k = 0..=m` (strictly increasing).
    s_at_theta: Vec<f64>,
}

impl ArcTable {
    fn theta_step(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.s_at_theta.len() - 1) as f64
    }

    /// Invert `s(θ)`: bracketing lookup, then Newton with exact panel
    /// quadrature for the local arc length.
    fn theta_of_s(&self, curve: &ParametricBoundary, s: f64) -> f64 {
        let total = *self.s_at_theta.last().unwrap();
        let sw = s.rem_euclid(total);
        let idx = self
            .s_at_theta
            .partition_point(|&v| v <= sw)
            .saturating_sub(1);
        let dt = self.theta_step();
        let th_base = idx as f64 * dt;
        let span = self.s_at_theta[idx + 1] - self.s_at_theta[idx];
        let mut theta = th_base + dt * (sw - self.s_at_theta[idx]) / span;
        for _ in 0..3 {
            let s_here = self.s_at_theta[idx] + gl4(&|t| curve.speed(t), th_base, theta);
            theta -= (s_here - sw) / curve.speed(theta);
        }
        theta
    }
}

/// Refined curvature-maximum data.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CurvatureMax {
    pub s0: f64,
    pub k_max: f64,
    /// `k₂ = -κ''(s₀)`.
    pub k2: f64,
    /// Number of equivalent maxima: 1, or 2 for the antipodal pair of a
    /// centrally symmetric curve (such as any ellipse).
    pub multiplicity: usize,
}

/// Curvature profile of a closed curve on a uniform arc-length lattice. The
/// maximum data is attached by [`locate_max`]; curves with constant curvature
/// (discs) carry a profile but no maximum.
#[derive(Debug, Clone)]
pub struct CurvatureProfile {
    pub perimeter: f64,
    pub area: f64,
    /// κ sampled on the uniform s-lattice `s_k = k·P/samples`.
    pub kappa: Vec<f64>,
    pub max: Option<CurvatureMax>,
    curve: ParametricBoundary,
    arc: ArcTable,
}

/// Gauss-Legendre 4-point panel quadrature of `f` over `[a, b]`.
fn gl4(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const X: [f64; 4] = [
        -0.861136311594053,
        -0.339981043584856,
        0.339981043584856,
        0.861136311594053,
    ];
    const W: [f64; 4] = [
        0.347854845137454,
        0.652145154862546,
        0.652145154862546,
        0.347854845137454,
    ];
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in X.iter().zip(W.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Build the curvature profile: arc-length table, κ on the uniform s-lattice,
/// perimeter and area. Fails on open, self-intersecting or negatively
/// oriented input.
pub fn build_profile(boundary: &ParametricBoundary) -> Result<CurvatureProfile, GeometryError> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let p0 = boundary.point(0.0);
    let p1 = boundary.point(two_pi);
    let scale = p0[0].hypot(p0[1]).max(1.0);
    if (p0[0] - p1[0]).hypot(p0[1] - p1[1]) > 1e-12 * scale {
        return Err(GeometryError::NonSmooth(
            "endpoint mismatch: curve is not closed over [0, 2π)".into(),
        ));
    }
    check_simple(boundary)?;

    // cumulative arc length, one GL4 panel per θ step; refine until stable
    let mut m = 4096usize;
    let (table, perimeter) = loop {
        let dt = two_pi / m as f64;
        let mut s = Vec::with_capacity(m + 1);
        s.push(0.0);
        let mut acc = 0.0;
        for k in 0..m {
            acc += gl4(&|t| boundary.speed(t), k as f64 * dt, (k + 1) as f64 * dt);
            s.push(acc);
        }
        if m >= 16384 {
            break (ArcTable { s_at_theta: s }, acc);
        }
        let dt2 = two_pi / (2 * m) as f64;
        let mut acc2 = 0.0;
        for k in 0..2 * m {
            acc2 += gl4(&|t| boundary.speed(t), k as f64 * dt2, (k + 1) as f64 * dt2);
        }
        if (acc2 - acc).abs() <= 1e-12 * acc.abs() {
            break (ArcTable { s_at_theta: s }, acc);
        }
        m *= 2;
    };
    if !table.s_at_theta.windows(2).all(|w| w[1] > w[0]) {
        return Err(GeometryError::NonSmooth("arc-length table not monotone".into()));
    }

    // area by the shoelace integral
    let shoelace = |t: f64| {
        let p = boundary.point(t);
        let v = boundary.velocity(t);
        0.5 * (p[0] * v[1] - p[1] * v[0])
    };
    let mq = 4096;
    let dtq = two_pi / mq as f64;
    let mut area = 0.0;
    for k in 0..mq {
        area += gl4(&shoelace, k as f64 * dtq, (k + 1) as f64 * dtq);
    }
    if area <= 0.0 {
        return Err(GeometryError::NonSmooth(
            "curve is negatively oriented (det(T, ν) = -1); parametrize counterclockwise".into(),
        ));
    }

    let ns = boundary.samples;
    let mut profile = CurvatureProfile {
        perimeter,
        area,
        kappa: Vec::new(),
        max: None,
        curve: boundary.clone(),
        arc: table,
    };
    profile.kappa = (0..ns)
        .map(|k| profile.kappa_at(k as f64 * perimeter / ns as f64))
        .collect();
    Ok(profile)
}

/// Build the profile and attach the curvature-maximum analysis.
pub fn analyze_boundary(boundary: &ParametricBoundary) -> Result<CurvatureProfile, GeometryError> {
    let mut p = build_profile(boundary)?;
    let max = locate_max(&p)?;
    p.max = Some(max);
    Ok(p)
}

/// Pairwise segment check for self-intersections at sample resolution.
fn check_simple(boundary: &ParametricBoundary) -> Result<(), GeometryError> {
    let n = 512usize;
    let two_pi = 2.0 * std::f64::consts::PI;
    let pts: Vec<[f64; 2]> = (0..n)
        .map(|k| boundary.point(k as f64 * two_pi / n as f64))
        .collect();
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue; // adjacent around the seam
            }
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            let (c, d) = (pts[j], pts[(j + 1) % n]);
            if segments_cross(a, b, c, d) {
                return Err(GeometryError::NotSimpleCurve(
                    i as f64 * two_pi / n as f64,
                    j as f64 * two_pi / n as f64,
                ));
            }
        }
    }
    Ok(())
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let orient = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| {
        (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    };
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Locate the curvature maximum: lattice argmax, local least-squares
/// quadratic refinement, degeneracy and multiplicity checks.
///
/// A tie with the refined maximum is tolerated only as its antipodal image on
/// a centrally symmetric curve (`κ(s + P/2) = κ(s)`), reported as
/// multiplicity 2; any other tie is [`GeometryError::MultipleMaxima`].
pub fn locate_max(p: &CurvatureProfile) -> Result<CurvatureMax, GeometryError> {
    let ns = p.kappa.len();
    let ds = p.perimeter / ns as f64;
    // first lattice argmax (deterministic under exact ties)
    let mut imax = 0usize;
    for (i, &k) in p.kappa.iter().enumerate() {
        if k > p.kappa[imax] {
            imax = i;
        }
    }
    let kmax_lattice = p.kappa[imax];

    // least-squares quadratic over a 9-point window around the argmax
    let w = 4i64;
    let mut sx = [0.0f64; 5];
    let mut sy = [0.0f64; 3];
    for k in -w..=w {
        let x = k as f64 * ds;
        let idx = ((imax as i64 + k).rem_euclid(ns as i64)) as usize;
        let y = p.kappa[idx];
        let mut xp = 1.0;
        for (j, s) in sx.iter_mut().enumerate() {
            *s += xp;
            if j < 3 {
                sy[j] += y * xp;
            }
            xp *= x;
        }
    }
    let a = [
        [sx[0], sx[1], sx[2]],
        [sx[1], sx[2], sx[3]],
        [sx[2], sx[3], sx[4]],
    ];
    let q =
        solve3(a, sy).ok_or_else(|| GeometryError::NonSmooth("quadratic fit singular".into()))?;
    let k2 = -2.0 * q[2];
    if k2 <= K2_FLOOR {
        return Err(GeometryError::DegenerateMaximum { k2, floor: K2_FLOOR });
    }
    let offset = -q[1] / (2.0 * q[2]);
    let s0 = (imax as f64 * ds + offset).rem_euclid(p.perimeter);
    let k_max = p.kappa_at(s0);

    // tie detection away from the refined maximum
    let mut tie: Option<usize> = None;
    for (i, &k) in p.kappa.iter().enumerate() {
        if kmax_lattice - k <= TIE_TOL {
            let dist = circ_dist(i as f64 * ds, s0, p.perimeter);
            if dist > (w as f64 + 1.5) * ds {
                tie = Some(i);
                break;
            }
        }
    }
    let multiplicity = if let Some(i) = tie {
        let s_tie = i as f64 * ds;
        let anti = (s0 + 0.5 * p.perimeter).rem_euclid(p.perimeter);
        let near_antipode = circ_dist(s_tie, anti, p.perimeter) <= (w as f64 + 1.5) * ds;
        let congruent = near_antipode
            && (0..32).all(|j| {
                let d = j as f64 * p.perimeter / 64.0;
                (p.kappa_at(s0 + d) - p.kappa_at(anti + d)).abs() <= 1e-8 * k_max.abs().max(1.0)
            });
        if !congruent {
            return Err(GeometryError::MultipleMaxima(s0, s_tie));
        }
        2
    } else {
        1
    };
    Ok(CurvatureMax {
        s0,
        k_max,
        k2,
        multiplicity,
    })
}

fn circ_dist(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let det = det3(a);
    if det.abs() < 1e-300 {
        return None;
    }
    let mut x = [0.0f64; 3];
    for k in 0..3 {
        let mut m = a;
        for row in 0..3 {
            m[row][k] = b[row];
        }
        x[k] = det3(m) / det;
    }
    Some(x)
}

impl CurvatureProfile {
    /// Exact curvature at arc length `s` (inverts the arc table and evaluates
    /// the curve; no lattice interpolation error).
    pub fn kappa_at(&self, s: f64) -> f64 {
        let theta = self.arc.theta_of_s(&self.curve, s);
        self.curve.curvature_theta(theta)
    }

    /// Maximum data, or an error for constant-curvature profiles.
    pub fn require_max(&self) -> Result<&CurvatureMax, GeometryError> {
        self.max.as_ref().ok_or(GeometryError::DegenerateMaximum {
            k2: 0.0,
            floor: K2_FLOOR,
        })
    }

    pub fn kappa_upper_bound(&self) -> f64 {
        self.kappa.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Total turning ∮κ ds computed on the lattice (2π for a simple closed
    /// positively oriented curve).
    pub fn total_turning(&self) -> f64 {
        let ds = self.perimeter / self.kappa.len() as f64;
        self.kappa.iter().sum::<f64>() * ds
    }

    /// CSV rows `(s, κ(s))` on the uniform lattice.
    pub fn write_profile_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "s,kappa")?;
        let ds = self.perimeter / self.kappa.len() as f64;
        for (k, kap) in self.kappa.iter().enumerate() {
            writeln!(w, "{:.12e},{:.12e}", k as f64 * ds, kap)?;
        }
        Ok(())
    }

    /// Tubular-strip metric with depth `t0`; requires `t0 < 1/max κ`.
    pub fn strip_metric(&self, t0: f64) -> Result<StripMetric, GeometryError> {
        let kmax_all = self.kappa_upper_bound();
        if t0 <= 0.0 || (kmax_all > 0.0 && t0 >= 1.0 / kmax_all) {
            return Err(GeometryError::StripTooDeep {
                t0,
                limit: 1.0 / kmax_all,
            });
        }
        Ok(StripMetric {
            t0,
            flux_offset: self.area / self.perimeter,
            profile: self.clone(),
        })
    }
}

/// Metric and gauge data of the boundary strip: weight `a = 1 - tκ(s)`,
/// tangential gauge field `Ã₁ = -t(1 - tκ(s)/2)` (zero normal component),
/// and the flux offset `|Ω|/|∂Ω|` that restores the circulation of the true
/// vector potential on the periodic strip.
#[derive(Debug, Clone)]
pub struct StripMetric {
    pub t0: f64,
    pub flux_offset: f64,
    pub profile: CurvatureProfile,
}

impl StripMetric {
    pub fn a(&self, s: f64, t: f64) -> f64 {
        1.0 - t * self.profile.kappa_at(s)
    }

    /// Paper gauge without the flux offset; the solver adds the (reduced)
    /// offset itself.
    pub fn a1(&self, s: f64, t: f64) -> f64 {
        -t * (1.0 - 0.5 * t * self.profile.kappa_at(s))
    }
}

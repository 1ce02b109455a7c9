//! Acceptance suite: one test per published claim, each printing a PASS/FAIL
//! line with the measured numbers. Expensive artifacts (reference constants,
//! the ellipse benchmark sweep) are computed once and shared.
//!
//! The ellipse a=2, b=1 is the canonical benchmark. Note that its curvature
//! maximum is attained at BOTH vertices (any ellipse is centrally
//! symmetric), so the operator's low spectrum consists of near-degenerate
//! well pairs split only by tunneling; the harmonic ladder of the effective
//! model appears between consecutive PAIRS. Gap checks therefore use the
//! ladder distance `μ^(1+mult) - μ^(1)`.

use std::time::Instant;

use magspec_core::effective::{self, DiscBoundParams, ExpansionCoefficients};
use magspec_core::geometry::{analyze_boundary, build_profile, ParametricBoundary};
use magspec_core::harness::{run_sweep, trial_energy, GridPolicy, SweepReport};
use magspec_core::model1d::{HalfLineGrid, ModelConstants};
use magspec_core::solver2d::{disc_solve, lowest_eigs, DiscProblem, StripProblem};
use once_cell::sync::Lazy;

const SWEEP_H: [f64; 5] = [0.02, 0.014, 0.01, 0.007, 0.005];

static CONSTANTS: Lazy<ModelConstants> =
    Lazy::new(|| ModelConstants::compute(&HalfLineGrid::reference()).expect("model constants"));

static ELLIPSE: Lazy<magspec_core::geometry::CurvatureProfile> =
    Lazy::new(|| analyze_boundary(&ParametricBoundary::ellipse(2.0, 1.0)).expect("ellipse"));

struct TimedSweep {
    report: SweepReport,
    seconds: f64,
}

static SWEEP: Lazy<TimedSweep> = Lazy::new(|| {
    let t = Instant::now();
    let report = run_sweep(&ELLIPSE, &CONSTANTS, &SWEEP_H, &GridPolicy::default()).expect("sweep");
    TimedSweep {
        report,
        seconds: t.elapsed().as_secs_f64(),
    }
});

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Criterion 1: the model-constant identity suite at the reference grid.
#[test]
fn criterion_1_model_constant_identities() {
    let t = Instant::now();
    let mc = ModelConstants::compute(&HalfLineGrid::reference()).expect("model constants");
    let elapsed = t.elapsed().as_secs_f64();
    let mut all_ok = true;
    for id in &mc.identities {
        let ok = id.residual.abs() <= 1e-6;
        all_ok &= ok;
        println!(
            "[{}] criterion 1: identity {:<32} residual {:+.3e} (tol 1e-6)",
            verdict(ok),
            id.name,
            id.residual
        );
    }
    let time_ok = elapsed < 10.0;
    println!(
        "[{}] criterion 1: runtime {:.2} s (< 10 s)",
        verdict(time_ok),
        elapsed
    );
    assert!(all_ok, "an identity residual exceeded 1e-6");
    assert!(time_ok, "identity suite took {elapsed:.2} s");
}

/// Criterion 2: the h^{7/4} coefficient of the expansion is strictly below
/// the variational one: sqrt(3 C1 sqrt(theta0)) < 1.
#[test]
fn criterion_2_coefficient_inequality() {
    let mc = &*CONSTANTS;
    let ratio = (3.0 * mc.c1 * mc.theta0.sqrt()).sqrt();
    let ok = ratio < 1.0;
    println!(
        "[{}] criterion 2: sqrt(3 C1 sqrt(theta0)) = {:.6} < 1",
        verdict(ok),
        ratio
    );
    assert!(ok);
    // same number via the coefficient objects
    let co = ExpansionCoefficients::new(mc, &ELLIPSE).unwrap();
    assert!(co.c74(1) < co.var_74);
}

/// Criterion 3: flat strip (κ ≡ 0) reproduces Θ₀h at h = 0.01.
#[test]
fn criterion_3_flat_strip_consistency() {
    let t = Instant::now();
    let mc = &*CONSTANTS;
    let h = 0.01;
    let period = 4.0;
    let policy = GridPolicy::default();
    let t0 = policy.t0(h, 0.0).min(0.65);
    let ns = policy.ns(h, period);
    let nt = policy.nt(h, t0);
    let p = StripProblem::flat(h, period, t0, -mc.xi0 * h.sqrt(), mc, ns, nt).unwrap();
    let out = lowest_eigs(&p, 1).unwrap();
    let rel = (out.eigenvalues[0] - mc.theta0 * h).abs() / h;
    let elapsed = t.elapsed().as_secs_f64();
    let ok = rel <= 1e-3;
    let time_ok = elapsed < 60.0;
    println!(
        "[{}] criterion 3: |mu1 - theta0 h|/h = {:.3e} (tol 1e-3), runtime {:.1} s (< 60 s) [{}]",
        verdict(ok && time_ok),
        rel,
        elapsed,
        verdict(time_ok)
    );
    assert!(ok, "flat-strip deviation {rel:.3e}");
    assert!(time_ok);
}

/// Criterion 4: two-term law on the ellipse over h in [0.005, 0.02].
#[test]
fn criterion_4_two_term_law() {
    let sweep = &*SWEEP;
    let fit = sweep.report.fit.as_ref().expect("fit");
    let time_ok = sweep.seconds <= 900.0;
    let c0_ok = fit.dev_c0 <= 1e-3;
    let c1_ok = fit.dev_c1_rel <= 0.05;
    println!(
        "[{}] criterion 4: |c0 - theta0| = {:.3e} (tol 1e-3), c0 = {:.6}",
        verdict(c0_ok),
        fit.dev_c0,
        fit.c0
    );
    println!(
        "[{}] criterion 4: |c1 + 2 C1|/(2 C1) = {:.4} (tol 0.05), c1 = {:.6}",
        verdict(c1_ok),
        fit.dev_c1_rel,
        fit.c1
    );
    println!(
        "[{}] criterion 4: sweep runtime {:.1} s (<= 900 s)",
        verdict(time_ok),
        sweep.seconds
    );
    assert!(time_ok, "sweep took {:.1} s", sweep.seconds);
    assert!(
        c1_ok,
        "h^(3/2) coefficient off by {:.2}% (tol 5%)",
        100.0 * fit.dev_c1_rel
    );
    assert!(c0_ok, "leading coefficient off by {:.3e} (tol 1e-3)", fit.dev_c0);
}

/// Criterion 5: gap coefficient. On the ellipse the maximum is a symmetric
/// pair, so the harmonic-ladder distance is `μ³ - μ¹`; its ratio to
/// `C₁ Θ₀^{1/4} √(6k₂) h^{7/4}` must be within 15% at the smallest h and the
/// deviation must decrease monotonically along the lattice.
#[test]
fn criterion_5_gap_coefficient() {
    let sweep = &*SWEEP;
    let coeff = sweep.report.theory.gap_coefficient();
    let deviations: Vec<f64> = sweep
        .report
        .ladder_gap_ratio
        .iter()
        .map(|r| (r / coeff - 1.0).abs())
        .collect();
    let monotone = deviations.windows(2).all(|w| w[1] < w[0]);
    let last_dev = *deviations.last().unwrap();
    let close_ok = last_dev <= 0.15;
    for (rec, dev) in sweep.report.records.iter().zip(&deviations) {
        println!(
            "       criterion 5: h = {:.3}: ladder gap ratio {:.4} vs {:.4}, deviation {:.3}",
            rec.h,
            rec.ladder_gap / rec.h.powf(1.75),
            coeff,
            dev
        );
    }
    println!(
        "[{}] criterion 5: deviation decreases monotonically over the lattice",
        verdict(monotone)
    );
    println!(
        "[{}] criterion 5: smallest-h deviation {:.3} (tol 0.15)",
        verdict(close_ok),
        last_dev
    );
    assert!(monotone, "gap-ratio deviation not monotone: {deviations:?}");
    assert!(
        close_ok,
        "gap ratio at h = {} deviates by {:.1}% from the h^(7/4) coefficient (tol 15%); \
         the next expansion order (relative size ~h^(1/8)) is still dominant at reachable h",
        SWEEP_H[SWEEP_H.len() - 1],
        100.0 * last_dev
    );
}

/// Criterion 6: variational sandwich and the three-term value of the trial
/// state at the optimal width.
#[test]
fn criterion_6_variational_sandwich() {
    let sweep = &*SWEEP;
    let mc = &*CONSTANTS;
    let policy = GridPolicy::default();
    let co = &sweep.report.theory;
    let mut sandwich_ok = true;
    for rec in &sweep.report.records {
        let p = policy.problem(&ELLIPSE, mc, rec.h).unwrap();
        let (_, alpha_opt) = co.variational_bound(rec.h);
        // at coarse h the normal cutoff clips real mass; the Rayleigh
        // principle is unaffected, so use a loose clip budget here
        let te = trial_energy(&p, alpha_opt, 0.05).unwrap();
        let ok = rec.mu1 <= te.value;
        sandwich_ok &= ok;
        println!(
            "[{}] criterion 6: h = {:.3}: mu1 = {:.8e} <= trial = {:.8e} (clip {:.1e})",
            verdict(ok),
            rec.h,
            rec.mu1,
            te.value,
            te.clipped_mass
        );
    }
    // three-term match at alpha_opt, h <= 0.01
    let h = 0.01;
    let p = policy.problem(&ELLIPSE, mc, h).unwrap();
    let (bound3, alpha_opt) = co.variational_bound(h);
    let te = trial_energy(&p, alpha_opt, 1e-4).unwrap();
    let budget = 0.5 * h.powf(15.0 / 8.0);
    let err = (te.value - bound3).abs();
    let match_ok = err <= budget;
    println!(
        "[{}] criterion 6: |trial(alpha_opt) - three-term| = {:.3e} vs budget 0.5 h^(15/8) = {:.3e} at h = {}",
        verdict(match_ok),
        err,
        budget,
        h
    );
    assert!(sandwich_ok, "Rayleigh sandwich violated");
    assert!(
        match_ok,
        "trial-state h^(15/8) tail ({:.3e}) exceeds the budgeted 0.5 h^(15/8) = {:.3e}",
        err, budget
    );
}

/// Criterion 7: disc validation. The radial solver respects the disc lower
/// bound for h in {0.02, 0.01, 0.005}, and the strip solver on the circle
/// agrees with the radial solver to 4 significant digits at h = 0.01.
#[test]
fn criterion_7_disc_validation() {
    let mc = &*CONSTANTS;
    // (a) lower-bound shape with the echoed remainder constant
    let params = DiscBoundParams {
        threshold: 10.0,
        c_rem: 2.0,
    };
    let mut bound_ok = true;
    let mut fitted_c_rem = f64::NEG_INFINITY;
    for &h in &[0.02, 0.01, 0.005] {
        let out = disc_solve(&DiscProblem::new(h, 1.0), 1).unwrap();
        let lb = effective::disc_lower_bound(h, 1.0, 1.0, mc, params).unwrap();
        let ok = out.eigenvalues[0] >= lb.value;
        bound_ok &= ok;
        // remainder constant that would make the bound tight
        let two_term = mc.theta0 * h - mc.c1 * h.powf(1.5);
        fitted_c_rem = fitted_c_rem.max((two_term - out.eigenvalues[0]) / (h * h));
        println!(
            "[{}] criterion 7: h = {:.3}: radial mu1 = {:.8e} >= bound {:.8e} (C_rem = {})",
            verdict(ok),
            h,
            out.eigenvalues[0],
            lb.value,
            params.c_rem
        );
    }
    println!("       criterion 7: fitted remainder constant = {fitted_c_rem:.3}");
    assert!(bound_ok);
    assert!(
        fitted_c_rem <= params.c_rem,
        "fitted remainder {fitted_c_rem:.3} exceeds the configured constant"
    );

    // (b) strip-on-circle vs radial, 4 significant digits at h = 0.01
    let h = 0.01;
    let mut disc = DiscProblem::new(h, 1.0);
    disc.nr = 8192;
    let radial = disc_solve(&disc, 1).unwrap().eigenvalues[0];
    let circle = build_profile(&ParametricBoundary::circle(1.0)).unwrap();
    let metric = circle.strip_metric(0.5).unwrap();
    let solve_at = |nt: usize| {
        let p = StripProblem::from_metric(&metric, mc, h, 2048, nt).unwrap();
        lowest_eigs(&p, 1).unwrap().eigenvalues[0]
    };
    let coarse = solve_at(96);
    let fine = solve_at(192);
    // the transverse discretization error is cleanly O(dt^2)
    let strip = fine + (fine - coarse) / 3.0;
    let ulp4 = 10f64.powf(radial.abs().log10().floor() - 3.0);
    let diff = (strip - radial).abs();
    let ok = diff <= 0.5 * ulp4;
    println!(
        "[{}] criterion 7: circle strip mu1 = {:.8e} vs radial {:.8e}, |diff| = {:.2e} (4 sig digits: {:.2e})",
        verdict(ok),
        strip,
        radial,
        diff,
        0.5 * ulp4
    );
    assert!(ok, "strip/radial mismatch {diff:.3e}");
}

/// Criterion 8: robustness of the strip solver. Large-gauge shifts leave the
/// spectrum invariant; deepening the Dirichlet truncation at fixed transverse
/// spacing moves the ground eigenvalue by less than 1e-6 Θ₀h.
#[test]
fn criterion_8_robustness() {
    let mc = &*CONSTANTS;
    // (a) large-gauge invariance at h = 0.01 (moderate grid)
    let h = 0.01;
    let metric = ELLIPSE.strip_metric(0.45).unwrap();
    let p1 = StripProblem::from_metric(&metric, mc, h, 640, 64).unwrap();
    let mut p2 = p1.clone();
    p2.gauge_offset += 2.0 * std::f64::consts::PI * h / ELLIPSE.perimeter;
    let e1 = lowest_eigs(&p1, 2).unwrap();
    let e2 = lowest_eigs(&p2, 2).unwrap();
    let gauge_diff = (e1.eigenvalues[0] - e2.eigenvalues[0]).abs();
    let gauge_tol = 1e-8 * mc.theta0 * h;
    let gauge_ok = gauge_diff <= gauge_tol;
    println!(
        "[{}] criterion 8: large-gauge shift moves mu1 by {:.2e} (solver tolerance {:.2e})",
        verdict(gauge_ok),
        gauge_diff,
        gauge_tol
    );

    // (b) truncation robustness deep in the semiclassical regime: identical
    // transverse spacing, depths t0 and 1.5 t0
    let h = 0.002;
    let (nt1, nt2) = (88usize, 132usize);
    let dt = 0.28 / nt1 as f64;
    let m1 = ELLIPSE.strip_metric(nt1 as f64 * dt).unwrap();
    let m2 = ELLIPSE.strip_metric(nt2 as f64 * dt).unwrap();
    let q1 = StripProblem::from_metric(&m1, mc, h, 1024, nt1).unwrap();
    let q2 = StripProblem::from_metric(&m2, mc, h, 1024, nt2).unwrap();
    let r1 = lowest_eigs(&q1, 1).unwrap();
    let r2 = lowest_eigs(&q2, 1).unwrap();
    let trunc_diff = (r1.eigenvalues[0] - r2.eigenvalues[0]).abs();
    let trunc_tol = 1e-6 * mc.theta0 * h;
    let trunc_ok = trunc_diff <= trunc_tol;
    println!(
        "[{}] criterion 8: t0 -> 1.5 t0 moves mu1 by {:.2e} (tol 1e-6 theta0 h = {:.2e}) at h = {}",
        verdict(trunc_ok),
        trunc_diff,
        trunc_tol,
        h
    );
    assert!(gauge_ok, "gauge shift changed mu1 by {gauge_diff:.3e}");
    assert!(trunc_ok, "truncation change {trunc_diff:.3e} exceeds {trunc_tol:.3e}");
}

/// Supplementary: localization of the computed ground state (99% of the mass
/// within 6√h normally and 10 h^{1/8} tangentially at h = 0.005; the
/// tangential bound follows from the recorded RMS spread by Chebyshev).
#[test]
fn supplementary_localization() {
    let sweep = &*SWEEP;
    let rec = sweep.report.records.last().unwrap();
    assert_eq!(rec.h, 0.005);
    // mass beyond t0/2 bounds the mass beyond 6 sqrt(h) since t0/2 < 6 sqrt(h)
    let t_ok = rec.t_mass_tail <= 0.01;
    let s_bound = (rec.s_spread / (10.0 * rec.h.powf(0.125))).powi(2);
    let s_ok = s_bound <= 0.01;
    println!(
        "[{}] localization: normal tail {:.2e}, tangential Chebyshev bound {:.2e}",
        verdict(t_ok && s_ok),
        rec.t_mass_tail,
        s_bound
    );
    assert!(t_ok && s_ok);
}

/// Supplementary: the sweep's variational-consistency budget
/// mu1 <= bound + 0.2 h^{15/8}.
#[test]
fn supplementary_variational_consistency() {
    let sweep = &*SWEEP;
    for rec in &sweep.report.records {
        let (bound, _) = sweep.report.theory.variational_bound(rec.h);
        let slack = bound + 0.2 * rec.h.powf(15.0 / 8.0) - rec.mu1;
        println!(
            "       variational consistency: h = {:.3}: slack {:.3e}",
            rec.h, slack
        );
        assert!(slack >= 0.0, "mu1 exceeds the variational budget at h = {}", rec.h);
    }
}

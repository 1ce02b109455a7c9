//! `magspec` — compute the universal half-line constants, evaluate the
//! closed-form eigenvalue expansions, run direct boundary-strip and disc
//! eigensolves, sweep over the field parameter and evaluate trial states.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 usage error, 3 hypothesis
//! failure (degenerate geometry).

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use magspec_core::effective::{self, ExpansionCoefficients};
use magspec_core::error::{GeometryError, HarnessError, SolverError};
use magspec_core::geometry::{analyze_boundary, build_profile, CurvatureProfile, ParametricBoundary};
use magspec_core::harness::{emit_report, run_sweep, trial_energy, GridPolicy};
use magspec_core::model1d::{HalfLineGrid, ModelConstants};
use magspec_core::solver2d::{assemble_strip, disc_solve, lowest_eigs_with, DiscProblem, EigSolveOptions, StripProblem};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "magspec",
    version,
    about = "Spectral asymptotics of the 2D magnetic Neumann Laplacian"
)]
struct Cli {
    /// Flat key-value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (MAGSPEC_OUT overrides this).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Boundary curve: ellipse:a,b or circle:r.
    #[arg(long, global = true)]
    curve: Option<String>,
    /// Field parameters, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    h: Option<Vec<f64>>,
    /// Expansion level n (1 = ground state).
    #[arg(long, global = true)]
    level: Option<usize>,
    /// Worker threads (0 = available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override a single configuration key, e.g. --set grid.n=512.
    #[arg(long, global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Half-line model constants with the identity residual table.
    Constants,
    /// Closed-form eigenvalue expansion table over the h-range.
    Expand,
    /// Direct eigensolve at one h (boundary strip, or disc with --disc).
    Solve {
        /// Solve the disc of radius disc.radius by radial reduction.
        #[arg(long)]
        disc: bool,
        /// Dump the assembled matrix in coordinate-triplet text form.
        #[arg(long)]
        dump_matrix: bool,
    },
    /// h-sweep with the coefficient fit and report files.
    Sweep,
    /// Trial-state Rayleigh quotient at the optimal (or given) width.
    Trial {
        /// Also scan the width parameter around the optimum.
        #[arg(long)]
        scan: bool,
    },
}

enum Failure {
    Usage(String),
    Numerical(String),
    Hypothesis(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 1,
            Failure::Hypothesis(_) => 3,
        }
    }
    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) | Failure::Hypothesis(m) => m,
        }
    }
}

fn classify_geometry(e: GeometryError) -> Failure {
    match e {
        GeometryError::DegenerateMaximum { .. } | GeometryError::MultipleMaxima(..) => {
            Failure::Hypothesis(format!(
                "{e}; the non-degeneracy hypothesis (unique curvature maximum with k2 > 0) fails"
            ))
        }
        other => Failure::Numerical(other.to_string()),
    }
}

fn classify_solver(e: SolverError) -> Failure {
    match e {
        SolverError::Geometry(g) => classify_geometry(g),
        other => Failure::Numerical(other.to_string()),
    }
}

fn classify_harness(e: HarnessError) -> Failure {
    match e {
        HarnessError::Solver(s) => classify_solver(s),
        HarnessError::Effective(x) => Failure::Hypothesis(x.to_string()),
        HarnessError::EmptySweep => Failure::Usage("empty sweep h-list".into()),
        other => Failure::Numerical(other.to_string()),
    }
}

/// Files written during one invocation; every artifact is echoed.
struct Manifest {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Manifest {
    fn new(dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)?;
        println!("wrote {}", path.display());
        self.files.push(path.clone());
        Ok(path)
    }

    fn finish(self) -> std::io::Result<()> {
        let listing: Vec<String> = self
            .files
            .iter()
            .map(|p| p.display().to_string())
            .collect();
        let manifest = serde_json::json!({ "schema_version": 1, "files": listing });
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap())?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

fn boundary_from(cfg: &RunConfig) -> ParametricBoundary {
    let b = match cfg.curve.kind.as_str() {
        "circle" => ParametricBoundary::circle(cfg.curve.r),
        _ => ParametricBoundary::ellipse(cfg.curve.a, cfg.curve.b),
    };
    b.with_samples(cfg.curve.samples)
}

fn policy_from(cfg: &RunConfig) -> GridPolicy {
    GridPolicy {
        ds_ref: cfg.solver_ds_ref,
        h_ref: 0.01,
        nodes_per_depth: cfg.solver_nodes_per_depth,
        depth_scale: cfg.solver_depth_scale,
        depth_cap: cfg.solver_depth_cap,
        nt_min: cfg.solver_nt_min,
        k: cfg.solver_k,
        tol_rel: cfg.solver_tol,
        max_iter: cfg.solver_max_iter,
    }
}

/// Reject invalid configurations before any numerics run.
fn validate(cfg: &RunConfig) -> Result<(), Failure> {
    let usage = |m: String| Err(Failure::Usage(m));
    if cfg.grid_length < 8.0 {
        return usage(format!("grid.length = {} must be at least 8", cfg.grid_length));
    }
    if cfg.grid_n < 256 {
        return usage(format!("grid.n = {} must be at least 256", cfg.grid_n));
    }
    for (name, v) in [
        ("grid.tol_id", cfg.grid_tol_id),
        ("solver.tol", cfg.solver_tol),
        ("trial.clip_tol", cfg.trial_clip_tol),
        ("solver.ds_ref", cfg.solver_ds_ref),
        ("disc.radius", cfg.disc_radius),
        ("disc.b", cfg.disc_b),
    ] {
        if !(v > 0.0) {
            return usage(format!("{name} = {v} must be positive"));
        }
    }
    if cfg.sweep_h.iter().any(|&h| !(h > 0.0)) {
        return usage("all h values must be positive".into());
    }
    match cfg.curve.kind.as_str() {
        "ellipse" if cfg.curve.a <= 0.0 || cfg.curve.b <= 0.0 => {
            return usage("ellipse semi-axes must be positive".into());
        }
        "circle" if cfg.curve.r <= 0.0 => {
            return usage("circle radius must be positive".into());
        }
        _ => {}
    }
    if cfg.curve.samples < 64 {
        return usage(format!("curve.samples = {} must be at least 64", cfg.curve.samples));
    }
    if cfg.solver_k == 0 || cfg.expand_levels == 0 {
        return usage("solver.k and expand.levels must be at least 1".into());
    }
    Ok(())
}

fn model_constants(cfg: &RunConfig) -> Result<ModelConstants, Failure> {
    let grid = HalfLineGrid::new(cfg.grid_length, cfg.grid_n);
    ModelConstants::compute(&grid).map_err(|e| Failure::Numerical(e.to_string()))
}

fn analyzed_profile(cfg: &RunConfig) -> Result<CurvatureProfile, Failure> {
    analyze_boundary(&boundary_from(cfg)).map_err(classify_geometry)
}

fn cmd_constants(cfg: &RunConfig, manifest: &mut Manifest) -> Result<(), Failure> {
    let mc = model_constants(cfg)?;
    let json = serde_json::to_string_pretty(&mc.to_json()).unwrap();
    manifest.write("constants.json", &json).map_err(io_fail)?;
    let mut csv = Vec::new();
    mc.write_eigenfunction_csv(&mut csv).map_err(io_fail)?;
    manifest
        .write("u0.csv", &String::from_utf8(csv).unwrap())
        .map_err(io_fail)?;
    println!("theta0 = {:.10}", mc.theta0);
    println!("xi0    = {:.10}", mc.xi0);
    println!("C1     = {:.10}", mc.c1);
    println!("I2     = {:.10}", mc.i2);
    let mut failed = None;
    for id in &mc.identities {
        let ok = id.residual.abs() <= cfg.grid_tol_id;
        println!(
            "identity {:<32} residual {:+.3e}  [{}]",
            id.name,
            id.residual,
            if ok { "ok" } else { "FAILED" }
        );
        if !ok && failed.is_none() {
            failed = Some(id.name);
        }
    }
    if let Some(name) = failed {
        return Err(Failure::Numerical(format!(
            "identity '{name}' exceeds tol_id = {:.1e}",
            cfg.grid_tol_id
        )));
    }
    Ok(())
}

fn cmd_expand(cfg: &RunConfig, levels: usize, manifest: &mut Manifest) -> Result<(), Failure> {
    let mc = model_constants(cfg)?;
    let profile = analyzed_profile(cfg)?;
    let records = effective::expansion_table(levels, &cfg.sweep_h, &mc, &profile)
        .map_err(|e| Failure::Hypothesis(e.to_string()))?;
    let mut csv = Vec::new();
    effective::write_expansion_csv(&records, &mut csv).map_err(io_fail)?;
    manifest
        .write("expansion.csv", &String::from_utf8(csv).unwrap())
        .map_err(io_fail)?;
    let co = ExpansionCoefficients::new(&mc, &profile).map_err(|e| Failure::Hypothesis(e.to_string()))?;
    let levels_json = effective::harmonic_levels(levels, &mc, &profile)
        .map_err(|e| Failure::Hypothesis(e.to_string()))?;
    let json = serde_json::json!({
        "schema_version": 1,
        "coefficients": co,
        "harmonic_levels": levels_json,
        "records": records,
    });
    manifest
        .write("expand.json", &serde_json::to_string_pretty(&json).unwrap())
        .map_err(io_fail)?;
    let mut profile_csv = Vec::new();
    profile.write_profile_csv(&mut profile_csv).map_err(io_fail)?;
    manifest
        .write("profile.csv", &String::from_utf8(profile_csv).unwrap())
        .map_err(io_fail)?;
    for r in &records {
        println!("h = {:<9.5} n = {}  value = {:.10e}  [{}]", r.h, r.n, r.value, r.order_marker);
    }
    Ok(())
}

fn cmd_solve(
    cfg: &RunConfig,
    disc: bool,
    dump_matrix: bool,
    manifest: &mut Manifest,
) -> Result<(), Failure> {
    let h = *cfg
        .sweep_h
        .first()
        .ok_or_else(|| Failure::Usage("no h given".into()))?;
    let result = if disc {
        let p = DiscProblem {
            h,
            radius: cfg.disc_radius,
            b: cfg.disc_b,
            m_margin: cfg.disc_margin,
            nr: cfg.disc_nr,
        };
        disc_solve(&p, cfg.solver_k).map_err(classify_solver)?
    } else {
        let mc = model_constants(cfg)?;
        let profile = build_profile(&boundary_from(cfg)).map_err(classify_geometry)?;
        let profile = attach_max_if_present(profile);
        let policy = policy_from(cfg);
        let t0 = policy.t0(h, profile.kappa_upper_bound());
        let metric = profile.strip_metric(t0).map_err(classify_geometry)?;
        let p = StripProblem::from_metric(&metric, &mc, h, policy.ns(h, profile.perimeter), policy.nt(h, t0))
            .map_err(classify_solver)?;
        if dump_matrix {
            let assembled = assemble_strip(&p);
            let mut buf = Vec::new();
            assembled.matrix.write_triplets(&mut buf).map_err(io_fail)?;
            manifest
                .write("matrix.txt", &String::from_utf8(buf).unwrap())
                .map_err(io_fail)?;
        }
        let opts = EigSolveOptions {
            tol_rel: cfg.solver_tol,
            max_iter: cfg.solver_max_iter,
            extra_block: 2,
        };
        lowest_eigs_with(&p, cfg.solver_k, opts).map_err(classify_solver)?
    };
    let json = serde_json::json!({ "schema_version": 1, "result": result });
    manifest
        .write("spectral.json", &serde_json::to_string_pretty(&json).unwrap())
        .map_err(io_fail)?;
    for (i, ev) in result.eigenvalues.iter().enumerate() {
        let label = result
            .angular_labels
            .as_ref()
            .map(|l| format!("  m = {}", l[i]))
            .unwrap_or_default();
        println!("mu({}) = {:.10e}{}", i + 1, ev, label);
    }
    Ok(())
}

/// Keep the maximum data when the curve has one; a circle stays usable for
/// direct solves.
fn attach_max_if_present(mut profile: CurvatureProfile) -> CurvatureProfile {
    if profile.max.is_none() {
        if let Ok(m) = magspec_core::geometry::locate_max(&profile) {
            profile.max = Some(m);
        }
    }
    profile
}

fn cmd_sweep(cfg: &RunConfig, manifest: &mut Manifest) -> Result<(), Failure> {
    let mc = model_constants(cfg)?;
    let profile = analyzed_profile(cfg)?;
    let policy = policy_from(cfg);
    // the sweep contract wants a strictly decreasing lattice
    let mut h_list = cfg.sweep_h.clone();
    h_list.sort_by(|a, b| b.partial_cmp(a).unwrap());
    h_list.dedup();
    let report = run_sweep(&profile, &mc, &h_list, &policy).map_err(classify_harness)?;
    let files = emit_report(&report, &manifest.dir).map_err(classify_harness)?;
    for f in &files {
        println!("wrote {}", f.display());
    }
    manifest.files.extend(files);
    if let Some(fit) = &report.fit {
        println!(
            "fit: c0 = {:.8} c1 = {:.6} c2 = {:.4}  (dev: {:.2e}, {:.3}, {:.3})",
            fit.c0, fit.c1, fit.c2, fit.dev_c0, fit.dev_c1_rel, fit.dev_c2
        );
    }
    Ok(())
}

fn cmd_trial(cfg: &RunConfig, scan: bool, manifest: &mut Manifest) -> Result<(), Failure> {
    let mc = model_constants(cfg)?;
    let profile = analyzed_profile(cfg)?;
    let policy = policy_from(cfg);
    let co = ExpansionCoefficients::new(&mc, &profile).map_err(|e| Failure::Hypothesis(e.to_string()))?;
    let mut rows = Vec::new();
    for &h in &cfg.sweep_h {
        let p = policy.problem(&profile, &mc, h).map_err(classify_harness)?;
        let (_, alpha_opt) = co.variational_bound(h);
        let alpha = if cfg.trial_alpha > 0.0 {
            cfg.trial_alpha
        } else {
            alpha_opt
        };
        let te = trial_energy(&p, alpha, cfg.trial_clip_tol).map_err(classify_harness)?;
        println!(
            "h = {:<9.5} alpha = {:.6}  quotient = {:.10e}  clip = {:.2e}",
            h, te.alpha, te.value, te.clipped_mass
        );
        rows.push(te);
    }
    let json = serde_json::json!({ "schema_version": 1, "trials": rows });
    manifest
        .write("trial.json", &serde_json::to_string_pretty(&json).unwrap())
        .map_err(io_fail)?;
    if scan {
        let h = cfg.sweep_h[0];
        let p = policy.problem(&profile, &mc, h).map_err(classify_harness)?;
        let (_, alpha_opt) = co.variational_bound(h);
        let mut csv = String::from("alpha,quotient\n");
        for k in 0..=20 {
            let alpha = alpha_opt * (0.5 + k as f64 / 20.0);
            let te = trial_energy(&p, alpha, cfg.trial_clip_tol).map_err(classify_harness)?;
            csv.push_str(&format!("{:.12e},{:.12e}\n", alpha, te.value));
        }
        manifest.write("trial_scan.csv", &csv).map_err(io_fail)?;
    }
    Ok(())
}

fn io_fail(e: std::io::Error) -> Failure {
    Failure::Numerical(format!("i/o: {e}"))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        cfg = RunConfig::parse(&text).map_err(Failure::Usage)?;
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k.trim(), v.trim()).map_err(Failure::Usage)?;
    }
    if let Some(curve) = &cli.curve {
        cfg.set_curve_arg(curve).map_err(Failure::Usage)?;
    }
    if let Some(h) = &cli.h {
        if h.is_empty() {
            return Err(Failure::Usage("empty --h list".into()));
        }
        cfg.sweep_h = h.clone();
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.display().to_string();
    }
    if let Ok(env_out) = std::env::var("MAGSPEC_OUT") {
        cfg.out_dir = env_out;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    validate(&cfg)?;
    if cfg.threads > 0 {
        // ignore the error if a pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global();
    }

    let out_dir = PathBuf::from(&cfg.out_dir);
    let mut manifest = Manifest::new(&out_dir).map_err(io_fail)?;
    // effective configuration snapshot: reloading it reproduces this run
    manifest
        .write("config.used", &cfg.to_text())
        .map_err(io_fail)?;

    let levels = cli.level.unwrap_or(cfg.expand_levels).max(1);
    match cli.cmd {
        Cmd::Constants => cmd_constants(&cfg, &mut manifest)?,
        Cmd::Expand => cmd_expand(&cfg, levels, &mut manifest)?,
        Cmd::Solve { disc, dump_matrix } => cmd_solve(&cfg, disc, dump_matrix, &mut manifest)?,
        Cmd::Sweep => cmd_sweep(&cfg, &mut manifest)?,
        Cmd::Trial { scan } => cmd_trial(&cfg, scan, &mut manifest)?,
    }
    manifest.finish().map_err(io_fail)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

//! Flat key-value run configuration with dotted sections. The format is
//! diff-friendly for experiment tracking and round-trips losslessly:
//! `parse(to_text(cfg)) == cfg` for every representable configuration.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    /// "ellipse" or "circle".
    pub kind: String,
    pub a: f64,
    pub b: f64,
    pub r: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub curve: CurveSpec,
    /// Half-line model grid.
    pub grid_length: f64,
    pub grid_n: usize,
    pub grid_tol_id: f64,
    pub sweep_h: Vec<f64>,
    pub solver_ds_ref: f64,
    pub solver_nodes_per_depth: f64,
    pub solver_depth_scale: f64,
    pub solver_depth_cap: f64,
    pub solver_nt_min: usize,
    pub solver_k: usize,
    pub solver_tol: f64,
    pub solver_max_iter: usize,
    pub disc_radius: f64,
    pub disc_b: f64,
    pub disc_margin: f64,
    pub disc_nr: usize,
    /// 0 means "use the optimal width".
    pub trial_alpha: f64,
    pub trial_clip_tol: f64,
    pub expand_levels: usize,
    pub out_dir: String,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            curve: CurveSpec {
                kind: "ellipse".into(),
                a: 2.0,
                b: 1.0,
                r: 1.0,
                samples: 4096,
            },
            grid_length: 12.0,
            grid_n: 8192,
            grid_tol_id: 1e-6,
            sweep_h: vec![0.02, 0.014, 0.01, 0.007, 0.005],
            solver_ds_ref: 0.0095,
            solver_nodes_per_depth: 20.5,
            solver_depth_scale: 6.5,
            solver_depth_cap: 0.9,
            solver_nt_min: 64,
            solver_k: 2,
            solver_tol: 2e-10,
            solver_max_iter: 600,
            disc_radius: 1.0,
            disc_b: 1.0,
            disc_margin: 0.5,
            disc_nr: 4096,
            trial_alpha: 0.0,
            trial_clip_tol: 1e-8,
            expand_levels: 3,
            out_dir: "out".into(),
            threads: 0,
        }
    }
}

impl RunConfig {
    /// Apply one dotted-key assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let bad = |what: &str| format!("invalid value '{value}' for {what}");
        let f = || value.parse::<f64>().map_err(|_| bad(key));
        let u = || value.parse::<usize>().map_err(|_| bad(key));
        match key {
            "curve.kind" => {
                if value != "ellipse" && value != "circle" {
                    return Err(format!("curve.kind must be 'ellipse' or 'circle', got '{value}'"));
                }
                self.curve.kind = value.into();
            }
            "curve.a" => self.curve.a = f()?,
            "curve.b" => self.curve.b = f()?,
            "curve.r" => self.curve.r = f()?,
            "curve.samples" => self.curve.samples = u()?,
            "grid.length" => self.grid_length = f()?,
            "grid.n" => self.grid_n = u()?,
            "grid.tol_id" => self.grid_tol_id = f()?,
            "sweep.h" => {
                let mut hs = Vec::new();
                for part in value.split(',') {
                    hs.push(part.trim().parse::<f64>().map_err(|_| bad("sweep.h"))?);
                }
                self.sweep_h = hs;
            }
            "solver.ds_ref" => self.solver_ds_ref = f()?,
            "solver.nodes_per_depth" => self.solver_nodes_per_depth = f()?,
            "solver.depth_scale" => self.solver_depth_scale = f()?,
            "solver.depth_cap" => self.solver_depth_cap = f()?,
            "solver.nt_min" => self.solver_nt_min = u()?,
            "solver.k" => self.solver_k = u()?,
            "solver.tol" => self.solver_tol = f()?,
            "solver.max_iter" => self.solver_max_iter = u()?,
            "disc.radius" => self.disc_radius = f()?,
            "disc.b" => self.disc_b = f()?,
            "disc.margin" => self.disc_margin = f()?,
            "disc.nr" => self.disc_nr = u()?,
            "trial.alpha" => self.trial_alpha = f()?,
            "trial.clip_tol" => self.trial_clip_tol = f()?,
            "expand.levels" => self.expand_levels = u()?,
            "out.dir" => self.out_dir = value.into(),
            "threads" => self.threads = u()?,
            _ => return Err(format!("unknown configuration key '{key}'")),
        }
        Ok(())
    }

    /// Parse the flat `key = value` format (# starts a comment).
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected 'key = value'", lineno + 1))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        }
        Ok(cfg)
    }

    /// Serialize in a fixed field order. Floats print in shortest
    /// round-tripping form, so parse(to_text(c)) == c.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "curve.kind = {}", self.curve.kind);
        let _ = writeln!(s, "curve.a = {}", self.curve.a);
        let _ = writeln!(s, "curve.b = {}", self.curve.b);
        let _ = writeln!(s, "curve.r = {}", self.curve.r);
        let _ = writeln!(s, "curve.samples = {}", self.curve.samples);
        let _ = writeln!(s, "grid.length = {}", self.grid_length);
        let _ = writeln!(s, "grid.n = {}", self.grid_n);
        let _ = writeln!(s, "grid.tol_id = {}", self.grid_tol_id);
        let hs: Vec<String> = self.sweep_h.iter().map(|h| format!("{h}")).collect();
        let _ = writeln!(s, "sweep.h = {}", hs.join(","));
        let _ = writeln!(s, "solver.ds_ref = {}", self.solver_ds_ref);
        let _ = writeln!(s, "solver.nodes_per_depth = {}", self.solver_nodes_per_depth);
        let _ = writeln!(s, "solver.depth_scale = {}", self.solver_depth_scale);
        let _ = writeln!(s, "solver.depth_cap = {}", self.solver_depth_cap);
        let _ = writeln!(s, "solver.nt_min = {}", self.solver_nt_min);
        let _ = writeln!(s, "solver.k = {}", self.solver_k);
        let _ = writeln!(s, "solver.tol = {}", self.solver_tol);
        let _ = writeln!(s, "solver.max_iter = {}", self.solver_max_iter);
        let _ = writeln!(s, "disc.radius = {}", self.disc_radius);
        let _ = writeln!(s, "disc.b = {}", self.disc_b);
        let _ = writeln!(s, "disc.margin = {}", self.disc_margin);
        let _ = writeln!(s, "disc.nr = {}", self.disc_nr);
        let _ = writeln!(s, "trial.alpha = {}", self.trial_alpha);
        let _ = writeln!(s, "trial.clip_tol = {}", self.trial_clip_tol);
        let _ = writeln!(s, "expand.levels = {}", self.expand_levels);
        let _ = writeln!(s, "out.dir = {}", self.out_dir);
        let _ = writeln!(s, "threads = {}", self.threads);
        s
    }

    /// Parse a `--curve` argument: `ellipse:a,b` or `circle:r`.
    pub fn set_curve_arg(&mut self, arg: &str) -> Result<(), String> {
        let (kind, params) = arg
            .split_once(':')
            .ok_or_else(|| format!("--curve expects 'ellipse:a,b' or 'circle:r', got '{arg}'"))?;
        match kind {
            "ellipse" => {
                let (a, b) = params
                    .split_once(',')
                    .ok_or_else(|| format!("ellipse needs two semi-axes, got '{params}'"))?;
                self.curve.kind = "ellipse".into();
                self.curve.a = a.trim().parse().map_err(|_| format!("bad semi-axis '{a}'"))?;
                self.curve.b = b.trim().parse().map_err(|_| format!("bad semi-axis '{b}'"))?;
            }
            "circle" => {
                self.curve.kind = "circle".into();
                self.curve.r = params
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad radius '{params}'"))?;
            }
            other => return Err(format!("unknown curve kind '{other}'")),
        }
        Ok(())
    }
}

//! Resolved run configuration and its flat `key = value` file format.
//!
//! Keys are the long flag names without the leading dashes. Lines starting
//! with `#` are comments, so the header block of any output file is itself a
//! valid config once the `# ` prefix is stripped.

use crate::error::{CliError, CliResult};
use selfsim::matcher::{Coupling, MatchOptions, SIGMA_MAX};
use serde::Serialize;
use std::path::{Path, PathBuf};

pub const DEFAULT_LADDER: [f64; 4] = [1e-2, 3e-3, 1e-3, 3e-4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CouplingMode {
    /// Critical when --p is omitted or equals the mass-critical 1 + 4/d, fixed otherwise.
    Auto,
    /// Use --p as given.
    Fixed,
    /// p = 1 + 4/(d − 2σ), so that σ is the critical exponent s_c.
    Critical,
}

/// Values as they came from the command line or the config file; `None` means unset.
#[derive(Debug, Clone, Default, PartialEq, clap::Args)]
pub struct Overrides {
    /// Spatial dimension.
    #[arg(long)]
    pub d: Option<u32>,
    /// Nonlinearity exponent (ignored with --coupling critical).
    #[arg(long)]
    pub p: Option<f64>,
    /// How p is tied to σ.
    #[arg(long, value_enum)]
    pub coupling: Option<CouplingMode>,
    /// Supercriticality σ in (0, 0.05]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Comma-separated, descending.
    #[arg(long, value_delimiter = ',')]
    pub sigma_list: Option<Vec<f64>>,
    /// Eigenvalue for `basis` (default: the leading-order law at --sigma).
    #[arg(long)]
    pub b: Option<f64>,
    /// ODE tolerance; also the shooting tolerance of the ground state.
    #[arg(long, visible_alias = "tol")]
    pub tol_ode: Option<f64>,
    /// Newton stopping threshold on the normalised residual.
    #[arg(long)]
    pub tol_newton: Option<f64>,
    /// Stopping threshold of the interior fixed-point iteration.
    #[arg(long)]
    pub tol_picard: Option<f64>,
    /// Newton iteration cap
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Outer radius (default max(b⁻², 50)).
    #[arg(long)]
    pub r_far: Option<f64>,
    /// Relaxed parameter box, in multiples of the σ-scales.
    #[arg(long)]
    pub box_relax: Option<f64>,
    /// Threads for Jacobian columns.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Exterior profile samples per 0.01 in r.
    #[arg(long)]
    pub density: Option<f64>,
    /// Output directory, created if missing
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Flat key = value file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub d: Option<u32>,
    pub p: Option<f64>,
    pub coupling: CouplingMode,
    pub sigma: Option<f64>,
    pub sigma_list: Option<Vec<f64>>,
    pub b: Option<f64>,
    pub tol_ode: f64,
    pub tol_newton: f64,
    pub tol_picard: f64,
    pub max_iter: usize,
    pub r_far: Option<f64>,
    pub box_relax: f64,
    pub jobs: usize,
    pub density: f64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let m = MatchOptions::default();
        Self {
            d: None,
            p: None,
            coupling: CouplingMode::Auto,
            sigma: None,
            sigma_list: None,
            b: None,
            tol_ode: m.tol_ode,
            tol_newton: m.tol_newton,
            tol_picard: m.picard.tol,
            max_iter: m.max_iter,
            r_far: None,
            box_relax: m.box_relax,
            jobs: m.jobs,
            density: 1.0,
            out_dir: PathBuf::from("."),
        }
    }
}

/// Plain decimal in [1e-3, 1e6), exponent form otherwise; both round-trip.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 || (1e-3..1e6).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.trim().parse().map_err(|_| CliError::Config(format!("{key}: cannot parse {v:?}")))
}

fn parse_list(key: &str, v: &str) -> CliResult<Vec<f64>> {
    v.split(',').map(|s| parse_num(key, s)).collect()
}

/// Parse the flat config format into overrides.
pub fn parse_config(text: &str) -> CliResult<Overrides> {
    let mut o = Overrides::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key = value", n + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        match key.replace('_', "-").as_str() {
            "d" => o.d = Some(parse_num(key, value)?),
            "p" => o.p = Some(parse_num(key, value)?),
            "coupling" => {
                o.coupling = Some(match value {
                    "auto" => CouplingMode::Auto,
                    "fixed" => CouplingMode::Fixed,
                    "critical" => CouplingMode::Critical,
                    _ => return Err(CliError::Config(format!("coupling must be auto, fixed or critical, got {value:?}"))),
                })
            }
            "sigma" => o.sigma = Some(parse_num(key, value)?),
            "sigma-list" => o.sigma_list = Some(parse_list(key, value)?),
            "b" => o.b = Some(parse_num(key, value)?),
            "tol-ode" | "tol" => o.tol_ode = Some(parse_num(key, value)?),
            "tol-newton" => o.tol_newton = Some(parse_num(key, value)?),
            "tol-picard" => o.tol_picard = Some(parse_num(key, value)?),
            "max-iter" => o.max_iter = Some(parse_num(key, value)?),
            "r-far" => o.r_far = Some(parse_num(key, value)?),
            "box-relax" => o.box_relax = Some(parse_num(key, value)?),
            "jobs" => o.jobs = Some(parse_num(key, value)?),
            "density" => o.density = Some(parse_num(key, value)?),
            "out-dir" => o.out_dir = Some(PathBuf::from(value)),
            _ => return Err(CliError::Config(format!("config line {}: unknown key {key:?}", n + 1))),
        }
    }
    Ok(o)
}

pub fn read_config(path: &Path) -> CliResult<Overrides> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

impl RunConfig {
    /// Defaults, then the config file named in `flags` (if any), then the flags.
    pub fn resolve(flags: &Overrides) -> CliResult<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &flags.config {
            cfg.apply(&read_config(path)?);
        }
        cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = &o.$f { self.$f = v.clone().into(); } )* };
        }
        set!(d, p, sigma, sigma_list, b, r_far);
        set!(coupling, tol_ode, tol_newton, tol_picard, max_iter, box_relax, jobs, density, out_dir);
    }

    pub fn validate(&self) -> CliResult<()> {
        let positive = [
            ("tol-ode", self.tol_ode),
            ("tol-newton", self.tol_newton),
            ("tol-picard", self.tol_picard),
            ("box-relax", self.box_relax),
            ("density", self.density),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.box_relax < 1.0 {
            return Err(CliError::Config(format!("box-relax must be at least 1, got {}", self.box_relax)));
        }
        if self.jobs == 0 || self.max_iter == 0 {
            return Err(CliError::Config("jobs and max-iter must be at least 1".into()));
        }
        let sigmas = self.sigma.iter().chain(self.sigma_list.iter().flatten());
        for s in sigmas {
            if !(*s > 0.0 && *s <= SIGMA_MAX) {
                return Err(CliError::Config(format!("σ = {s} outside the supported range (0, {SIGMA_MAX}]")));
            }
        }
        if let Some(list) = &self.sigma_list {
            if list.is_empty() {
                return Err(CliError::Config("sigma-list is empty".into()));
            }
        }
        Ok(())
    }

    pub fn require_d(&self) -> CliResult<u32> {
        self.d.ok_or_else(|| CliError::Config("missing required --d".into()))
    }

    pub fn require_sigma(&self) -> CliResult<f64> {
        self.sigma.ok_or_else(|| CliError::Config("missing required --sigma".into()))
    }

    pub fn coupling(&self) -> CliResult<Coupling> {
        let d = self.require_d()?;
        let mass_critical = 1.0 + 4.0 / d as f64;
        match (self.coupling, self.p) {
            (CouplingMode::Critical, _) | (CouplingMode::Auto, None) => Ok(Coupling::Critical),
            (CouplingMode::Auto, Some(p)) if (p - mass_critical).abs() <= 1e-12 * p => Ok(Coupling::Critical),
            (_, Some(p)) => Ok(Coupling::Fixed(p)),
            (CouplingMode::Fixed, None) => Err(CliError::Config("missing required --p".into())),
        }
    }

    /// Exponent p at `sigma`. Without σ the critical coupling gives 1 + 4/d.
    pub fn exponent(&self, sigma: Option<f64>) -> CliResult<f64> {
        let d = self.require_d()?;
        Ok(self.coupling()?.exponent(d, sigma.unwrap_or(0.0)))
    }

    pub fn ladder(&self) -> Vec<f64> {
        match (&self.sigma_list, self.sigma) {
            (Some(list), _) => list.clone(),
            (None, Some(s)) => vec![s],
            (None, None) => DEFAULT_LADDER.to_vec(),
        }
    }

    pub fn match_options(&self) -> MatchOptions {
        let mut m = MatchOptions {
            tol_ode: self.tol_ode,
            tol_newton: self.tol_newton,
            max_iter: self.max_iter,
            box_relax: self.box_relax,
            r_far: self.r_far,
            jobs: self.jobs,
            ..Default::default()
        };
        m.picard.tol = self.tol_picard;
        m
    }

    /// Every key in file order; unset options are omitted.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut opt = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k, v));
            }
        };
        opt("d", self.d.map(|v| v.to_string()));
        opt("p", self.p.map(fmt_f64));
        opt("coupling", Some(match self.coupling {
            CouplingMode::Auto => "auto".into(),
            CouplingMode::Fixed => "fixed".into(),
            CouplingMode::Critical => "critical".into(),
        }));
        opt("sigma", self.sigma.map(fmt_f64));
        opt("sigma-list", self.sigma_list.as_ref().map(|l| l.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(", ")));
        opt("b", self.b.map(fmt_f64));
        opt("tol-ode", Some(fmt_f64(self.tol_ode)));
        opt("tol-newton", Some(fmt_f64(self.tol_newton)));
        opt("tol-picard", Some(fmt_f64(self.tol_picard)));
        opt("max-iter", Some(self.max_iter.to_string()));
        opt("r-far", self.r_far.map(fmt_f64));
        opt("box-relax", Some(fmt_f64(self.box_relax)));
        opt("jobs", Some(self.jobs.to_string()));
        opt("density", Some(fmt_f64(self.density)));
        opt("out-dir", Some(self.out_dir.display().to_string()));
        out
    }

    pub fn to_text(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

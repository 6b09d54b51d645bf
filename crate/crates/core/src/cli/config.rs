//! Run configuration: built-in defaults, an optional flat `key = value` file, then flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{GtscParams, DEFAULT_BOUNDARY_TOL};

/// Environment variable consulted for the default seed.
pub const SEED_ENV: &str = "GTSC_RUIN_SEED";

pub const DEFAULT_SEED: u64 = 20_100_601;

/// Fully resolved settings of one CLI invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: GtscParams,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_n: usize,
    pub boundary_tol: f64,
    pub sim: SimOptions,
}

/// Simulation options; `None` means "use the model-dependent default".
#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub u: Option<f64>,
    pub n_ruined: u64,
    pub epsilon: Option<f64>,
    pub dt: Option<f64>,
    pub barrier: Option<f64>,
    pub horizon: Option<f64>,
    pub workers: usize,
    pub path_budget: Option<u64>,
    pub gaussian_correction: Option<bool>,
}

/// Raw key/value pairs, in the order of precedence they were merged.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings(BTreeMap<String, String>);

pub const KEYS: &[&str] = &[
    "q",
    "dH",
    "c",
    "alpha",
    "rho",
    "seed",
    "out",
    "grid-min",
    "grid-max",
    "grid-n",
    "boundary-tol",
    "u",
    "n-ruined",
    "epsilon",
    "dt",
    "barrier",
    "horizon",
    "workers",
    "path-budget",
    "gaussian-correction",
];

impl Settings {
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(key.to_string(), value.into());
    }

    /// Parses `key = value` lines; blank lines and lines starting with `#` are skipped.
    pub fn parse_file_text(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = split_pair(line).ok_or_else(|| {
                Error::invalid(format!("config line {}: expected key = value", n + 1))
            })?;
            if !KEYS.contains(&k) {
                return Err(Error::invalid(format!(
                    "config line {}: unknown key '{k}'",
                    n + 1
                )));
            }
            s.set(k, v);
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_file_text(&text)
    }

    /// Reads the `# key=value` metadata block of a CSV written by this tool; keys that
    /// are not configuration (regime, constants, summaries) are ignored.
    pub fn from_csv_header(text: &str) -> Self {
        let mut s = Settings::default();
        for line in text.lines() {
            let Some(rest) = line.strip_prefix('#') else {
                break;
            };
            if let Some((k, v)) = split_pair(rest.trim()) {
                if KEYS.contains(&k) {
                    s.set(k, v);
                }
            }
        }
        s
    }

    pub fn contains(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    /// Entries of `other` take precedence.
    pub fn overlay(mut self, other: &Settings) -> Self {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
        self
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::invalid(format!("cannot parse {key} = '{v}'"))),
        }
    }

    /// Resolves against the built-in defaults (the parameter point q = 1, d_H = 0.5,
    /// c = 1, α = 0.1, ρ = 0.5) and validates.
    pub fn resolve(&self) -> Result<RunConfig> {
        let model = GtscParams::new(
            self.get("q")?.unwrap_or(1.0),
            self.get("dH")?.unwrap_or(0.5),
            self.get("c")?.unwrap_or(1.0),
            self.get("alpha")?.unwrap_or(0.1),
            self.get("rho")?.unwrap_or(0.5),
        )?;
        let seed = match self.get::<u64>("seed")? {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(v) => v.parse().map_err(|_| {
                    Error::invalid(format!("{SEED_ENV} = '{v}' is not a 64-bit integer"))
                })?,
                Err(_) => DEFAULT_SEED,
            },
        };
        let cfg = RunConfig {
            model,
            seed,
            out: self.0.get("out").map(PathBuf::from),
            grid_min: self.get("grid-min")?.unwrap_or(0.0),
            grid_max: self.get("grid-max")?.unwrap_or(20.0),
            grid_n: self.get("grid-n")?.unwrap_or(201),
            boundary_tol: self.get("boundary-tol")?.unwrap_or(DEFAULT_BOUNDARY_TOL),
            sim: SimOptions {
                u: self.get("u")?,
                n_ruined: self.get("n-ruined")?.unwrap_or(10_000),
                epsilon: self.get("epsilon")?,
                dt: self.get("dt")?,
                barrier: self.get("barrier")?,
                horizon: self.get("horizon")?,
                workers: self.get("workers")?.unwrap_or(1),
                path_budget: self.get("path-budget")?,
                gaussian_correction: self.get("gaussian-correction")?,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn split_pair(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once('=')?;
    Some((k.trim(), v.trim()))
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.grid_min.is_finite()
            && self.grid_max.is_finite()
            && self.grid_min <= self.grid_max)
        {
            return Err(Error::invalid("grid-min must not exceed grid-max"));
        }
        if self.grid_n == 0 {
            return Err(Error::invalid("grid-n must be at least 1"));
        }
        if self.grid_n > 1 && self.grid_min == self.grid_max {
            return Err(Error::invalid("grid-min equals grid-max but grid-n > 1"));
        }
        if !(self.boundary_tol > 0.0) {
            return Err(Error::invalid("boundary-tol must be positive"));
        }
        if let Some(u) = self.sim.u {
            if !(u > 0.0 && u.is_finite()) {
                return Err(Error::invalid(format!("u must be positive, got {u}")));
            }
        }
        if self.sim.n_ruined == 0 {
            return Err(Error::invalid("n-ruined must be at least 1"));
        }
        if self.sim.workers == 0 {
            return Err(Error::invalid("workers must be at least 1"));
        }
        Ok(())
    }

    /// Evenly spaced grid; a single point sits at grid-min.
    pub fn grid(&self) -> Vec<f64> {
        if self.grid_n == 1 {
            return vec![self.grid_min];
        }
        let step = (self.grid_max - self.grid_min) / (self.grid_n - 1) as f64;
        (0..self.grid_n)
            .map(|i| {
                if i + 1 == self.grid_n {
                    self.grid_max
                } else {
                    self.grid_min + step * i as f64
                }
            })
            .collect()
    }

    /// `key=value` lines that reparse to this configuration.
    pub fn header_lines(&self) -> Vec<String> {
        let p = &self.model;
        let mut lines = vec![
            format!("q={:?}", p.q),
            format!("dH={:?}", p.d_h),
            format!("c={:?}", p.c),
            format!("alpha={:?}", p.alpha),
            format!("rho={:?}", p.rho),
            format!("seed={}", self.seed),
            format!("grid-min={:?}", self.grid_min),
            format!("grid-max={:?}", self.grid_max),
            format!("grid-n={}", self.grid_n),
            format!("boundary-tol={:?}", self.boundary_tol),
        ];
        if let Some(out) = &self.out {
            lines.push(format!("out={}", out.display()));
        }
        let s = &self.sim;
        let optional = [
            ("u", s.u),
            ("epsilon", s.epsilon),
            ("dt", s.dt),
            ("barrier", s.barrier),
            ("horizon", s.horizon),
        ];
        for (k, v) in optional {
            if let Some(v) = v {
                lines.push(format!("{k}={v:?}"));
            }
        }
        lines.push(format!("n-ruined={}", s.n_ruined));
        lines.push(format!("workers={}", s.workers));
        if let Some(b) = s.path_budget {
            lines.push(format!("path-budget={b}"));
        }
        if let Some(g) = s.gaussian_correction {
            lines.push(format!("gaussian-correction={g}"));
        }
        lines
    }
}

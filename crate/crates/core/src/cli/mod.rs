//! The `gtsc-ruin` command line.
//!
//! Exit codes: 0 success, 1 failed check or a model/estimation error, 2 usage error.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{RunConfig, Settings, SimOptions, DEFAULT_SEED, KEYS, SEED_ENV};

use crate::error::Error;
use crate::laws::{gtsc_ladder, ruin_probability_asymptotic, tabulate, LadderModel, LawKind};
use crate::model::{boundary_alpha, classify, GtscParams, Regime, RegimeReport};
use crate::simulator::{
    estimate_conditional_laws_multi, write_events_csv, RuinEvent, SimScheme, EVENT_CSV_HEADER,
};
use crate::verify::{identity_checks, mc_checks, Check, McPlan};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "gtsc-ruin",
    version,
    about = "Ruin asymptotics and first-passage laws for GTSC Lévy risk models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify the model and print its regime constants.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Print JSON instead of key=value lines.
        #[arg(long)]
        json: bool,
    },
    /// Tabulate the limiting overshoot, undershoot and max-undershoot CDFs.
    Laws {
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate f(alpha) over an alpha grid and locate its root.
    Discriminant {
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the conditional laws given ruin by simulation.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
        /// Write one CSV row per simulated path to this file.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Run the identity checks, and with --mc the simulation comparisons.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
        /// Add the Monte Carlo comparisons.
        #[arg(long)]
        mc: bool,
        /// Multiply every tolerance by this factor.
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
    },
}

#[derive(Args, Debug, Default)]
struct Common {
    #[arg(long, allow_hyphen_values = true)]
    q: Option<String>,
    #[arg(long = "dH", allow_hyphen_values = true)]
    d_h: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<String>,
    /// Root seed (default: $GTSC_RUIN_SEED, else 20100601).
    #[arg(long)]
    seed: Option<String>,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    grid_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    grid_max: Option<String>,
    #[arg(long)]
    grid_n: Option<String>,
    /// Absolute band on f(alpha) treated as the regime boundary.
    #[arg(long)]
    boundary_tol: Option<String>,
    /// Flat `key = value` file; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct SimArgs {
    /// Reserve level (default 20).
    #[arg(long, allow_hyphen_values = true)]
    u: Option<String>,
    /// Ruined paths to collect.
    #[arg(long)]
    n_ruined: Option<String>,
    /// Jumps below epsilon are replaced by drift and Gaussian noise.
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<String>,
    /// Diffusion sub-step.
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<String>,
    /// Paths below -barrier count as not ruined.
    #[arg(long, allow_hyphen_values = true)]
    barrier: Option<String>,
    /// Time cap; paths reaching it are censored.
    #[arg(long, allow_hyphen_values = true)]
    horizon: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    /// Maximum number of simulated paths.
    #[arg(long)]
    path_budget: Option<String>,
    /// Add the small-jump variance to the Brownian part (true/false).
    #[arg(long)]
    gaussian_correction: Option<String>,
}

impl Common {
    fn settings(&self) -> Settings {
        let mut s = Settings::default();
        let pairs = [
            ("q", &self.q),
            ("dH", &self.d_h),
            ("c", &self.c),
            ("alpha", &self.alpha),
            ("rho", &self.rho),
            ("seed", &self.seed),
            ("out", &self.out),
            ("grid-min", &self.grid_min),
            ("grid-max", &self.grid_max),
            ("grid-n", &self.grid_n),
            ("boundary-tol", &self.boundary_tol),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                s.set(k, v.clone());
            }
        }
        s
    }
}

impl SimArgs {
    fn settings(&self) -> Settings {
        let mut s = Settings::default();
        let pairs = [
            ("u", &self.u),
            ("n-ruined", &self.n_ruined),
            ("epsilon", &self.epsilon),
            ("dt", &self.dt),
            ("barrier", &self.barrier),
            ("horizon", &self.horizon),
            ("workers", &self.workers),
            ("path-budget", &self.path_budget),
            ("gaussian-correction", &self.gaussian_correction),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                s.set(k, v.clone());
            }
        }
        s
    }
}

/// A failed command: message for standard error and the exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParams(_) | Error::Domain(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_FAILURE,
        message: format!("cannot write {}: {e}", path.display()),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

/// Merges command defaults < config file < flags.
fn resolve(
    defaults: Settings,
    common: &Common,
    sim: Option<&SimArgs>,
) -> Result<(RunConfig, Settings), Failure> {
    let mut merged = defaults;
    if let Some(path) = &common.config {
        merged = merged.overlay(&Settings::from_file(path)?);
    }
    merged = merged.overlay(&common.settings());
    if let Some(sim) = sim {
        merged = merged.overlay(&sim.settings());
    }
    Ok((merged.resolve()?, merged))
}

fn dispatch(command: Command) -> Result<i32, Failure> {
    match command {
        Command::Classify { common, json } => {
            let (cfg, _) = resolve(Settings::default(), &common, None)?;
            cmd_classify(&cfg, json)
        }
        Command::Laws { common } => {
            let (cfg, _) = resolve(Settings::default(), &common, None)?;
            cmd_laws(&cfg)
        }
        Command::Discriminant { common } => {
            let mut d = Settings::default();
            d.set("grid-min", "0.01");
            d.set("grid-max", "0.2");
            d.set("grid-n", "191");
            let (cfg, _) = resolve(d, &common, None)?;
            cmd_discriminant(&cfg)
        }
        Command::Simulate {
            common,
            sim,
            events,
        } => {
            let (cfg, _) = resolve(Settings::default(), &common, Some(&sim))?;
            cmd_simulate(&cfg, events.as_deref())
        }
        Command::Verify {
            common,
            sim,
            mc,
            tol_scale,
        } => {
            if !(tol_scale > 0.0 && tol_scale.is_finite()) {
                return Err(
                    Error::invalid(format!("tol-scale must be positive, got {tol_scale}")).into(),
                );
            }
            let (cfg, merged) = resolve(Settings::default(), &common, Some(&sim))?;
            let alphas = if merged.contains("alpha") {
                vec![cfg.model.alpha]
            } else {
                vec![0.10, 0.05]
            };
            cmd_verify(&cfg, &alphas, mc, tol_scale)
        }
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), Failure> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_failure(path, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| io_failure(Path::new("<stdout>"), e))
        }
    }
}

/// Round-trip decimal text of a float.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn report_lines(r: &RegimeReport) -> Vec<String> {
    let mut lines = vec![
        format!("regime={}", r.regime),
        format!("f_alpha={}", num(r.f_alpha)),
    ];
    let optional = [
        ("nu0", r.nu0),
        ("alpha_minus_nu0", r.alpha_minus_nu0),
        ("m_star", r.m_star),
        ("beta1", r.beta1),
        ("beta2", r.beta2),
    ];
    for (k, v) in optional {
        if let Some(v) = v {
            lines.push(format!("{k}={}", num(v)));
        }
    }
    lines
}

fn header(cfg: &RunConfig, extra: &[String]) -> String {
    let mut s = String::new();
    for l in cfg.header_lines().iter().chain(extra) {
        let _ = writeln!(s, "# {l}");
    }
    s
}

fn boundary_failure(cfg: &RunConfig, r: &RegimeReport) -> Failure {
    let mut message = format!(
        "the model sits on the regime boundary: f(alpha) = {:e} is within boundary-tol = {:e} of zero, \
         and the limit laws are only defined on either side of it",
        r.f_alpha, cfg.boundary_tol
    );
    if let Ok(a0) = boundary_alpha(&cfg.model) {
        let _ = write!(
            message,
            "; move alpha away from {a0:.6} or lower --boundary-tol"
        );
    }
    Failure {
        code: EXIT_FAILURE,
        message,
    }
}

fn cmd_classify(cfg: &RunConfig, json: bool) -> Result<i32, Failure> {
    let r = classify(&cfg.model, cfg.boundary_tol)?;
    let creep = r
        .exponent(&cfg.model)
        .map(|k| k * cfg.model.d_h / cfg.model.q);
    let text = if json {
        // 17 significant digits; non-finite and absent values are null
        let j = |v: Option<f64>| match v {
            Some(x) if x.is_finite() => format!("{x:.16e}"),
            _ => "null".to_string(),
        };
        let p = &cfg.model;
        let fields = [
            ("q", Some(p.q)),
            ("dH", Some(p.d_h)),
            ("c", Some(p.c)),
            ("alpha", Some(p.alpha)),
            ("rho", Some(p.rho)),
            ("f_alpha", Some(r.f_alpha)),
            ("nu0", r.nu0),
            ("alpha_minus_nu0", r.alpha_minus_nu0),
            ("m_star", r.m_star),
            ("beta1", r.beta1),
            ("beta2", r.beta2),
            ("creep_probability", creep),
        ];
        let mut s = format!("{{\n  \"regime\": \"{}\"", r.regime);
        for (k, v) in fields {
            let _ = write!(s, ",\n  \"{k}\": {}", j(v));
        }
        s.push_str("\n}\n");
        s
    } else {
        let mut lines = report_lines(&r);
        if let Some(cp) = creep {
            lines.push(format!("creep_probability={}", num(cp)));
        }
        lines.iter().map(|l| format!("{l}\n")).collect()
    };
    emit(cfg, &text)?;
    Ok(EXIT_OK)
}

fn ladder_for(cfg: &RunConfig) -> Result<(RegimeReport, LadderModel), Failure> {
    let r = classify(&cfg.model, cfg.boundary_tol)?;
    if r.regime == Regime::Boundary {
        return Err(boundary_failure(cfg, &r));
    }
    Ok((r, gtsc_ladder(&cfg.model, &r)?))
}

fn cmd_laws(cfg: &RunConfig) -> Result<i32, Failure> {
    let (r, ladder) = ladder_for(cfg)?;
    let grid = cfg.grid();
    let curves = LawKind::ALL
        .iter()
        .map(|k| tabulate(&ladder, *k, &grid))
        .collect::<crate::Result<Vec<_>>>()?;
    let mut extra = report_lines(&r);
    extra.push(format!(
        "creep_probability={}",
        num(ladder.creep_probability())
    ));
    for (k, c) in LawKind::ALL.iter().zip(&curves) {
        extra.push(format!(
            "mass_at_infinity_{}={}",
            k.name(),
            num(c.mass_at_infinity)
        ));
    }
    let mut text = header(cfg, &extra);
    text.push_str("x,overshoot,undershoot,max_undershoot\n");
    for (i, x) in grid.iter().enumerate() {
        let _ = writeln!(
            text,
            "{},{},{},{}",
            num(*x),
            num(curves[0].values[i]),
            num(curves[1].values[i]),
            num(curves[2].values[i])
        );
    }
    emit(cfg, &text)?;
    Ok(EXIT_OK)
}

fn cmd_discriminant(cfg: &RunConfig) -> Result<i32, Failure> {
    let p = cfg.model;
    if !(p.rho > 0.0 && p.rho < 1.0) {
        return Err(Error::invalid(format!(
            "f(alpha) is finite only for rho in (0, 1), got rho = {}",
            p.rho
        ))
        .into());
    }
    let grid = cfg.grid();
    if grid[0] <= 0.0 {
        return Err(Error::invalid("the alpha grid must be strictly positive").into());
    }
    let a0 = boundary_alpha(&p)?;
    let mut text = header(cfg, &[format!("alpha0={}", num(a0))]);
    text.push_str("alpha,f\n");
    for a in grid {
        let f = GtscParams::new(p.q, p.d_h, p.c, a, p.rho)?.discriminant();
        let _ = writeln!(text, "{},{}", num(a), num(f));
    }
    emit(cfg, &text)?;
    Ok(EXIT_OK)
}

/// Reserve level used by `simulate` when none is given.
pub const DEFAULT_LEVEL: f64 = 20.0;

/// The simulation scheme implied by a configuration at level u.
pub fn scheme_for(cfg: &RunConfig, report: &RegimeReport, u: f64) -> crate::Result<SimScheme> {
    let mut s = SimScheme::default_for(&cfg.model, report, u, cfg.seed)?;
    let o = &cfg.sim;
    if let Some(v) = o.epsilon {
        s.epsilon = v;
    }
    if let Some(v) = o.gaussian_correction {
        s.use_gaussian_correction = v;
    }
    if let Some(v) = o.dt {
        s.dt = v;
    }
    if let Some(v) = o.barrier {
        s.barrier = v;
        s.horizon = 50.0 * (u + v) / cfg.model.q;
    }
    if let Some(v) = o.horizon {
        s.horizon = v;
    }
    if let Some(v) = o.path_budget {
        s.path_budget = v;
    }
    s.validate()?;
    Ok(s)
}

fn cmd_simulate(cfg: &RunConfig, events: Option<&Path>) -> Result<i32, Failure> {
    let p = &cfg.model;
    let r = classify(p, cfg.boundary_tol)?;
    let u = cfg.sim.u.unwrap_or(DEFAULT_LEVEL);
    let scheme = scheme_for(cfg, &r, u)?;
    let grid = cfg.grid();
    let ladder = match r.regime {
        Regime::Boundary => None,
        _ => Some(gtsc_ladder(p, &r)?),
    };

    let mut dump = match events {
        Some(path) => {
            let f = std::fs::File::create(path).map_err(|e| io_failure(path, e))?;
            let mut w = std::io::BufWriter::new(f);
            writeln!(w, "{EVENT_CSV_HEADER}").map_err(|e| io_failure(path, e))?;
            Some((path, w))
        }
        None => None,
    };
    let mut sink = |_: u64, ev: &[RuinEvent]| -> crate::Result<()> {
        if let Some((_, w)) = dump.as_mut() {
            write_events_csv(w, ev)
                .map_err(|e| Error::Estimation(format!("event dump failed: {e}")))?;
        }
        Ok(())
    };
    let sink_ref: Option<&mut dyn FnMut(u64, &[RuinEvent]) -> crate::Result<()>> =
        if events.is_some() {
            Some(&mut sink)
        } else {
            None
        };
    let est = estimate_conditional_laws_multi(
        p,
        &[u],
        cfg.sim.n_ruined,
        &scheme,
        &grid,
        cfg.sim.workers,
        sink_ref,
    )?
    .remove(0);
    if let Some((path, mut w)) = dump {
        w.flush().map_err(|e| io_failure(path, e))?;
    }

    let mut extra = report_lines(&r);
    let summary_keys = [
        ("scheme_epsilon", scheme.epsilon),
        ("scheme_dt", scheme.dt),
        ("scheme_barrier", scheme.barrier),
        ("scheme_horizon", scheme.horizon),
        ("level", u),
        ("ruin_fraction", est.ruin_fraction),
        ("ruin_half_width", est.overshoot.ruin_half_width),
        ("creep_fraction", est.creep_fraction),
        ("creep_standard_error", est.creep_standard_error),
        ("mean_tau", est.mean_tau),
        ("dkw_band", est.overshoot.dkw_band()),
    ];
    extra.push(format!(
        "scheme_gaussian_correction={}",
        scheme.use_gaussian_correction
    ));
    for (k, v) in summary_keys {
        extra.push(format!("{k}={}", num(v)));
    }
    extra.push(format!("n_paths={}", est.n_paths));
    extra.push(format!("n_ruined={}", est.n_ruined));
    extra.push(format!("n_censored={}", est.n_censored));
    let mut asymptotic = None;
    let mut sups = Vec::new();
    if let Some(l) = &ladder {
        let psi = ruin_probability_asymptotic(p, &r, u)?;
        asymptotic = Some(psi);
        extra.push(format!("ruin_asymptotic={}", num(psi)));
        extra.push(format!("creep_probability={}", num(l.creep_probability())));
        for kind in LawKind::ALL {
            let sup = est.curve(kind).sup_distance(|x| l.cdf(kind, x))?;
            extra.push(format!("sup_distance_{}={}", kind.name(), num(sup)));
            sups.push(sup);
        }
    }

    let mut text = header(cfg, &extra);
    text.push('x');
    for kind in LawKind::ALL {
        let _ = write!(text, ",{0}_mc,{0}_limit", kind.name());
    }
    text.push('\n');
    for (i, &x) in grid.iter().enumerate() {
        text.push_str(&num(x));
        for kind in LawKind::ALL {
            let limit = match &ladder {
                Some(l) => num(l.cdf(kind, x)?),
                None => String::new(),
            };
            let _ = write!(text, ",{},{}", num(est.curve(kind).values[i]), limit);
        }
        text.push('\n');
    }
    emit(cfg, &text)?;

    let mut summary = format!(
        "u={u} paths={} ruined={} censored={} ruin_fraction={:.6} +- {:.6}",
        est.n_paths, est.n_ruined, est.n_censored, est.ruin_fraction, est.overshoot.ruin_half_width
    );
    if let Some(psi) = asymptotic {
        let _ = write!(summary, " (asymptotic {psi:.6})");
    }
    let _ = write!(
        summary,
        " creep_fraction={:.4} +- {:.4}",
        est.creep_fraction,
        1.96 * est.creep_standard_error
    );
    if let Some(l) = &ladder {
        let _ = write!(summary, " (limit {:.4})", l.creep_probability());
        for (kind, sup) in LawKind::ALL.iter().zip(&sups) {
            let _ = write!(summary, " sup_{}={sup:.4}", kind.name());
        }
    }
    if cfg.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(EXIT_OK)
}

fn cmd_verify(cfg: &RunConfig, alphas: &[f64], mc: bool, tol_scale: f64) -> Result<i32, Failure> {
    let mut checks: Vec<Check> = Vec::new();
    for &alpha in alphas {
        let p = GtscParams { alpha, ..cfg.model };
        p.validate()?;
        checks.extend(identity_checks(&p, cfg.boundary_tol, cfg.seed, tol_scale)?);
        if mc {
            let r = classify(&p, cfg.boundary_tol)?;
            if r.regime == Regime::Boundary {
                return Err(boundary_failure(cfg, &r));
            }
            let local = RunConfig {
                model: p,
                ..cfg.clone()
            };
            let scheme_at = |u: f64| scheme_for(&local, &r, u);
            let plan = McPlan {
                u: cfg.sim.u,
                n_ruined: cfg.sim.n_ruined,
                n_pilot: 2000,
                workers: cfg.sim.workers,
                calibration_paths: 100_000,
            };
            checks.extend(mc_checks(&p, &r, &plan, &scheme_at, tol_scale)?);
        }
    }
    let mut text = String::new();
    for c in &checks {
        let _ = writeln!(text, "{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let _ = writeln!(text, "{} checks, {} failed", checks.len(), failed);
    emit(cfg, &text)?;
    if cfg.out.is_some() {
        print!("{text}");
    }
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILURE })
}

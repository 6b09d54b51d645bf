//! Self-checks of the analytic layer and, optionally, of the simulator against it.
//!
//! Every check reports an observed discrepancy and the tolerance it is held to; the
//! tolerances are multiplied by a common `tol_scale`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::laws::{
    gtsc_ladder, ruin_probability_asymptotic, ruin_probability_ladder_form, GtscLaws, LawKind,
};
use crate::model::{boundary_alpha, classify, GtscParams, Regime, RegimeReport};
use crate::simulator::{
    estimate_conditional_laws_multi, simulate_position, ConditionalEstimate, SimScheme,
};
use crate::special_functions::{gamma, integrate_to_infinity, QuadratureSpec};

/// One verified quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `observed <= tolerance` (NaN fails).
    pub fn at_most(name: impl Into<String>, observed: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            observed,
            tolerance,
            passed: observed <= tolerance,
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: observed {:.3e}, tolerance {:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            self.tolerance
        )
    }
}

/// Largest relative error of the tempered-stable integral identity
/// ∫₀^∞ (e^{θy} − 1) y^{−ρ−1} e^{−αy} dy = −Γ(−ρ)(α^ρ − (α−θ)^ρ)
/// over `n` seeded draws 0 < θ ≤ α ≤ 2, ρ ∈ (0.05, 0.95).
pub fn intid_max_relative_error(seed: u64, n: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = QuadratureSpec::new(1e-300, 1e-13, 200)?;
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let alpha = 2.0 * (1.0 - rng.random::<f64>());
        let theta = alpha * (1.0 - rng.random::<f64>());
        let rho = 0.05 + 0.9 * rng.random::<f64>();
        let f = |y: f64| {
            let tilt = if theta * y < 700.0 {
                (-alpha * y).exp() * (theta * y).exp_m1()
            } else {
                (-(alpha - theta) * y).exp() - (-alpha * y).exp()
            };
            tilt * y.powf(-rho - 1.0)
        };
        let tail = if theta == alpha { rho + 1.0 } else { 2.0 };
        let quad = integrate_to_infinity(f, 0.0, rho, tail, &spec)?;
        let exact = -gamma(-rho)? * (alpha.powf(rho) - (alpha - theta).powf(rho));
        worst = worst.max(((quad - exact) / exact).abs());
    }
    Ok(worst)
}

/// q such that f(α) equals `target`, the other parameters unchanged.
pub fn with_discriminant(p: &GtscParams, target: f64) -> Result<GtscParams> {
    if !(p.rho > 0.0 && p.rho < 1.0) {
        return Err(Error::domain(
            "the discriminant is finite only for rho in (0, 1)",
        ));
    }
    let q = p.d_h * p.alpha - p.c * p.alpha.powf(p.rho) * gamma(-p.rho)? - target;
    GtscParams::new(q, p.d_h, p.c, p.alpha, p.rho)
}

/// max over kinds and x ∈ {0, 0.1, …, 20} of the distance between the limit laws at
/// f(α) = +gap and f(α) = −gap (q adjusted).
pub fn boundary_sup_distance(p: &GtscParams, gap: f64) -> Result<f64> {
    let cr = with_discriminant(p, gap)?;
    let ce = with_discriminant(p, -gap)?;
    let lc = gtsc_ladder(&cr, &classify(&cr, 0.5 * gap)?)?;
    let le = gtsc_ladder(&ce, &classify(&ce, 0.5 * gap)?)?;
    if lc.regime() != Regime::Cramer || le.regime() != Regime::ConvolutionEquivalent {
        return Err(Error::state(
            "shifted models did not land on both sides of the boundary",
        ));
    }
    let mut sup: f64 = 0.0;
    for kind in LawKind::ALL {
        for i in 0..=200 {
            let x = 0.1 * i as f64;
            sup = sup.max((lc.cdf(kind, x)? - le.cdf(kind, x)?).abs());
        }
    }
    Ok(sup)
}

/// Locates x on the doubling grid 1, 2, 4, … where the defect-to-asymptote ratio first
/// comes within `band / 2` of one, then returns (x, max |ratio − 1|) over x, 2x and 4x.
pub fn tail_ratio_probe(laws: &GtscLaws, kind: LawKind, band: f64) -> Result<(f64, f64)> {
    let mut x = 1.0;
    for _ in 0..80 {
        if (laws.tail_ratio(kind, x)? - 1.0).abs() <= 0.5 * band {
            let mut worst: f64 = 0.0;
            for m in [1.0, 2.0, 4.0] {
                worst = worst.max((laws.tail_ratio(kind, m * x)? - 1.0).abs());
            }
            return Ok((x, worst));
        }
        x *= 2.0;
    }
    Err(Error::Accuracy {
        estimate: laws.tail_ratio(kind, x)?,
        error_bound: band,
    })
}

/// The analytic identity suite for one model.
pub fn identity_checks(
    p: &GtscParams,
    boundary_tol: f64,
    seed: u64,
    tol_scale: f64,
) -> Result<Vec<Check>> {
    let s = tol_scale;
    let report = classify(p, boundary_tol)?;
    let tag = format!("alpha={}", p.alpha);
    let mut out = vec![Check::at_most(
        "intid relative error (20 draws)",
        intid_max_relative_error(seed, 20)?,
        1e-8 * s,
    )];
    let GtscParams {
        q,
        d_h,
        c,
        alpha,
        rho,
    } = *p;

    match report.regime {
        Regime::Cramer => {
            let nu0 = report.nu0.expect("Cramer report has nu0");
            out.push(Check::at_most(
                format!("|psi_X(nu0)| {tag}"),
                p.psi_x(nu0)?.abs(),
                1e-12 * s,
            ));
            if rho != 0.0 {
                let gap = report.alpha_minus_nu0.expect("Cramer report has the gap");
                let lhs = 1.0 + c / q * gamma(-rho)? * (alpha.powf(rho) - gap.powf(rho));
                out.push(Check::at_most(
                    format!("creep identity, Cramer {tag}"),
                    (lhs - nu0 * d_h / q).abs(),
                    1e-10 * s,
                ));
            }
        }
        Regime::ConvolutionEquivalent => {
            let b2 = report.beta2.expect("CE report has beta2");
            let lhs = 1.0 - b2 + c / q * alpha.powf(rho) * gamma(-rho)?;
            out.push(Check::at_most(
                format!("creep identity, convolution equivalent {tag}"),
                (lhs - alpha * d_h / q).abs(),
                1e-12 * s,
            ));
        }
        Regime::Boundary => {}
    }

    if report.regime != Regime::Boundary {
        for u in [10.0, 50.0] {
            let a = ruin_probability_asymptotic(p, &report, u)?;
            let b = ruin_probability_ladder_form(p, &report, u)?;
            out.push(Check::at_most(
                format!("ruin asymptotic forms {tag} u={u}"),
                ((a - b) / b).abs(),
                1e-10 * s,
            ));
        }
    }

    if rho > 0.0 && rho < 1.0 {
        let a0 = boundary_alpha(p)?;
        let f0 = GtscParams { alpha: a0, ..*p }.discriminant();
        out.push(Check::at_most(
            format!("|f(alpha0)| at alpha0={a0:.6}"),
            f0.abs(),
            1e-12 * s,
        ));
        // the distance is linear in the gap, so the gap shrinks with the tolerance
        let gap = 1e-4 * s.min(1.0);
        if let Ok(sup) = boundary_sup_distance(p, gap) {
            out.push(Check::at_most(
                format!("boundary continuity {tag}, f=+-{gap:e}"),
                sup,
                1e-3 * s,
            ));
        }
    }

    if report.regime == Regime::Boundary || !(rho > 0.0) {
        return Ok(out);
    }
    let ladder = gtsc_ladder(p, &report)?;
    let laws = *ladder
        .closed_form()
        .expect("closed form attached for rho in (0, 1)");
    for kind in LawKind::ALL {
        let h = laws.horizon(kind, 1e-9)?;
        let miss = (laws.cdf(kind, h)? - laws.total_mass(kind)).abs();
        out.push(Check::at_most(
            format!("mass limit {kind} {tag} at x={h}"),
            miss,
            1e-6 * s,
        ));
    }
    let mut worst: f64 = 0.0;
    for kind in LawKind::ALL {
        for i in 0..50 {
            let x = 20.0 * i as f64 / 49.0;
            worst = worst.max((ladder.generic_cdf(kind, x)? - ladder.cdf(kind, x)?).abs());
        }
    }
    out.push(Check::at_most(
        format!("generic vs closed form {tag}, 50 points"),
        worst,
        1e-8 * s,
    ));
    for kind in LawKind::ALL {
        let (x, dev) = tail_ratio_probe(&laws, kind, 0.05 * s)?;
        out.push(Check::at_most(
            format!("tail ratio {kind} {tag} from x={x}"),
            dev,
            0.05 * s,
        ));
    }
    Ok(out)
}

/// Normal 97.5% quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Largest 95% binomial half-width of a CDF value estimated from `n` samples.
pub fn binomial_band(n: u64) -> f64 {
    Z95 * 0.5 / (n as f64).sqrt()
}

/// Two-sample Kolmogorov–Smirnov critical value at level 5%.
pub fn ks_band(n1: u64, n2: u64) -> f64 {
    1.358 * (1.0 / n1 as f64 + 1.0 / n2 as f64).sqrt()
}

fn sup_over_laws(a: &ConditionalEstimate, b: &ConditionalEstimate) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for kind in LawKind::ALL {
        sup = sup.max(a.curve(kind).sup_distance_to(b.curve(kind))?);
    }
    Ok(sup)
}

/// Grid on which the simulation comparisons are made: 0, 0.1, …, 20.
pub fn comparison_grid() -> Vec<f64> {
    (0..=200).map(|i| 0.1 * i as f64).collect()
}

/// Comparison of the conditional laws at u and 1.5u along the same paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityProbe {
    pub u: f64,
    /// Largest sup-distance over the three laws.
    pub sup: f64,
    /// Twice the binomial band at the number of ruins at 1.5u.
    pub allowed: f64,
    pub n_paths: u64,
}

impl StabilityProbe {
    pub fn stable(&self) -> bool {
        self.sup <= self.allowed
    }
}

/// Runs levels u and 1.5u until `n_pilot` ruins at 1.5u and compares the laws.
pub fn stability_probe(
    p: &GtscParams,
    u: f64,
    n_pilot: u64,
    scheme: &SimScheme,
    workers: usize,
) -> Result<StabilityProbe> {
    let est = estimate_conditional_laws_multi(
        p,
        &[u, 1.5 * u],
        n_pilot,
        scheme,
        &comparison_grid(),
        workers,
        None,
    )?;
    if est[1].n_ruined == 0 {
        return Err(Error::Estimation(format!(
            "no ruin at 1.5u = {} within the path budget",
            1.5 * u
        )));
    }
    Ok(StabilityProbe {
        u,
        sup: sup_over_laws(&est[0], &est[1])?,
        allowed: 2.0 * binomial_band(est[1].n_ruined),
        n_paths: est[0].n_paths,
    })
}

/// Smallest u on the ladder `start`·1.5^k (k = 0, 1, …, while u ≤ `max_u`) whose laws
/// are stable between u and 1.5u; every probe is returned, the last one deciding.
pub fn select_level(
    p: &GtscParams,
    start: f64,
    max_u: f64,
    n_pilot: u64,
    scheme_at: &dyn Fn(f64) -> Result<SimScheme>,
    workers: usize,
) -> Result<Vec<StabilityProbe>> {
    let mut probes = Vec::new();
    let mut u = start;
    while u <= max_u {
        let probe = stability_probe(p, u, n_pilot, &scheme_at(1.5 * u)?, workers)?;
        probes.push(probe);
        if probe.stable() {
            break;
        }
        u *= 1.5;
    }
    if probes.is_empty() {
        return Err(Error::domain("empty level ladder"));
    }
    Ok(probes)
}

/// Sup-distance between the laws at ε and ε/2 (independent seeds) and the KS band.
pub fn epsilon_halving(
    p: &GtscParams,
    u: f64,
    n: u64,
    scheme: &SimScheme,
    workers: usize,
) -> Result<(f64, f64)> {
    let grid = comparison_grid();
    let a = estimate_conditional_laws_multi(p, &[u], n, scheme, &grid, workers, None)?;
    let half = SimScheme {
        epsilon: 0.5 * scheme.epsilon,
        seed: scheme.seed.wrapping_add(1),
        ..*scheme
    };
    let b = estimate_conditional_laws_multi(p, &[u], n, &half, &grid, workers, None)?;
    Ok((
        sup_over_laws(&a[0], &b[0])?,
        ks_band(a[0].n_ruined, b[0].n_ruined),
    ))
}

/// Sample mean and standard error of X₁ over `n` paths.
pub fn mean_increment(p: &GtscParams, scheme: &SimScheme, n: u64) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::domain("at least two paths are needed"));
    }
    let (mut sum, mut sum2) = (0.0, 0.0);
    for i in 0..n {
        let x = simulate_position(
            p,
            1.0,
            scheme,
            &mut crate::simulator::path_rng(scheme.seed, i),
        )?;
        sum += x;
        sum2 += x * x;
    }
    let mean = sum / n as f64;
    let var = (sum2 - n as f64 * mean * mean) / (n as f64 - 1.0);
    Ok((mean, (var / n as f64).sqrt()))
}

/// Settings for [`mc_checks`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McPlan {
    /// Reserve level; chosen by [`select_level`] from 5 when absent.
    pub u: Option<f64>,
    pub n_ruined: u64,
    /// Ruins per run of the stability, ε-halving and dt studies.
    pub n_pilot: u64,
    pub workers: usize,
    /// Paths for the E X₁ calibration.
    pub calibration_paths: u64,
}

/// Simulation comparisons: u-stability, sup-distance of each conditional law to its
/// limit, creep fraction (with a dt-halving allowance), ruin fraction, ε-halving,
/// E X₁ and determinism across worker counts.
pub fn mc_checks(
    p: &GtscParams,
    report: &RegimeReport,
    plan: &McPlan,
    scheme_at: &dyn Fn(f64) -> Result<SimScheme>,
    tol_scale: f64,
) -> Result<Vec<Check>> {
    let s = tol_scale;
    let ladder = gtsc_ladder(p, report)?;
    let mut out = Vec::new();

    let probes = match plan.u {
        Some(u) => vec![stability_probe(
            p,
            u,
            plan.n_pilot,
            &scheme_at(1.5 * u)?,
            plan.workers,
        )?],
        None => select_level(p, 5.0, 100.0, plan.n_pilot, scheme_at, plan.workers)?,
    };
    let last = *probes.last().expect("at least one probe");
    let u = last.u;
    out.push(Check::at_most(
        format!("u-stability alpha={} u={u} vs 1.5u", p.alpha),
        last.sup,
        last.allowed * s,
    ));

    let scheme = scheme_at(u)?;
    let grid = comparison_grid();
    let est = estimate_conditional_laws_multi(
        p,
        &[u],
        plan.n_ruined,
        &scheme,
        &grid,
        plan.workers,
        None,
    )?
    .remove(0);
    let fine = SimScheme {
        dt: 0.5 * scheme.dt,
        ..scheme
    };
    let a =
        estimate_conditional_laws_multi(p, &[u], plan.n_pilot, &scheme, &grid, plan.workers, None)?
            .remove(0);
    let b =
        estimate_conditional_laws_multi(p, &[u], plan.n_pilot, &fine, &grid, plan.workers, None)?
            .remove(0);
    let allowance = (a.creep_fraction - b.creep_fraction).abs();
    out.extend(limit_law_checks(p, &ladder, report, &est, allowance, s)?);

    let (sup, band) = epsilon_halving(p, u, plan.n_pilot, &scheme, plan.workers)?;
    out.push(Check::at_most(
        format!("epsilon halving alpha={} u={u}", p.alpha),
        sup,
        band * s,
    ));

    let calib = SimScheme {
        seed: scheme.seed ^ 0x5eed,
        ..scheme
    };
    let (mean, se) = mean_increment(p, &calib, plan.calibration_paths)?;
    out.push(Check::at_most(
        format!(
            "mean of X_1 over {} paths, in standard errors",
            plan.calibration_paths
        ),
        (mean + p.q).abs() / se,
        3.0 * s,
    ));

    let n = plan.n_pilot.min(200);
    let once = estimate_conditional_laws_multi(p, &[u], n, &scheme, &grid, 1, None)?;
    let many =
        estimate_conditional_laws_multi(p, &[u], n, &scheme, &grid, plan.workers.max(2), None)?;
    out.push(Check::at_most(
        "determinism across worker counts",
        if once == many { 0.0 } else { 1.0 },
        0.0,
    ));
    Ok(out)
}

/// Sup-distance of each empirical law to the limit, creep fraction and ruin fraction.
///
/// The creep fraction may deviate by max(3 standard errors, `creep_allowance`).
pub fn limit_law_checks(
    p: &GtscParams,
    ladder: &crate::laws::LadderModel,
    report: &RegimeReport,
    est: &ConditionalEstimate,
    creep_allowance: f64,
    tol_scale: f64,
) -> Result<Vec<Check>> {
    let s = tol_scale;
    let tag = format!("alpha={} u={} n_ruined={}", p.alpha, est.u, est.n_ruined);
    let mut out = Vec::new();
    for kind in LawKind::ALL {
        let sup = est.curve(kind).sup_distance(|x| ladder.cdf(kind, x))?;
        out.push(Check::at_most(
            format!("sup-distance {kind} {tag}"),
            sup,
            0.05 * s,
        ));
    }
    let creep = ladder.creep_probability();
    out.push(Check::at_most(
        format!("creep fraction {tag}"),
        (est.creep_fraction - creep).abs(),
        (3.0 * est.creep_standard_error).max(creep_allowance) * s,
    ));
    let psi = ruin_probability_asymptotic(p, report, est.u)?;
    out.push(Check::at_most(
        format!("ruin fraction {tag}"),
        (est.ruin_fraction - psi).abs(),
        3.0 * est.ruin_standard_error * s,
    ));
    Ok(out)
}

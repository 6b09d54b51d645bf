use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::path::{check_levels, run_path, RuinEvent};
use super::{PathConstants, SimScheme};
use crate::error::{Error, Result};
use crate::laws::{check_grid, LawKind};
use crate::model::GtscParams;

/// Paths per round; fixed so that results do not depend on the worker count.
const BATCH: u64 = 4096;

/// Normal quantile used for the reported confidence half-widths.
const Z95: f64 = 1.959_963_984_540_054;

/// Empirical conditional CDF given ruin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalCdf {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub n_ruined: u64,
    pub ruin_fraction: f64,
    /// 95% binomial half-width of `ruin_fraction`.
    pub ruin_half_width: f64,
}

impl EmpiricalCdf {
    /// Binomial standard error of a CDF value at the sample size of this curve.
    pub fn standard_error(&self, value: f64) -> f64 {
        binomial_se(value, self.n_ruined)
    }

    /// 95% band of the supremum distance to the true CDF (Dvoretzky–Kiefer–Wolfowitz).
    pub fn dkw_band(&self) -> f64 {
        ((2.0_f64 / 0.05).ln() / (2.0 * self.n_ruined as f64)).sqrt()
    }

    /// max_i |values[i] − other(grid[i])|.
    pub fn sup_distance<F: Fn(f64) -> Result<f64>>(&self, other: F) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for (x, v) in self.grid.iter().zip(&self.values) {
            sup = sup.max((v - other(*x)?).abs());
        }
        Ok(sup)
    }

    /// max_i |values[i] − other.values[i]| on a shared grid.
    pub fn sup_distance_to(&self, other: &EmpiricalCdf) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::domain("curves are tabulated on different grids"));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// Result of [`estimate_conditional_laws`] at one level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalEstimate {
    pub u: f64,
    pub overshoot: EmpiricalCdf,
    pub undershoot: EmpiricalCdf,
    pub max_undershoot: EmpiricalCdf,
    pub creep_fraction: f64,
    pub creep_standard_error: f64,
    pub n_paths: u64,
    pub n_ruined: u64,
    pub n_censored: u64,
    pub ruin_fraction: f64,
    pub ruin_standard_error: f64,
    /// Mean passage time among ruined paths.
    pub mean_tau: f64,
}

impl ConditionalEstimate {
    pub fn curve(&self, kind: LawKind) -> &EmpiricalCdf {
        match kind {
            LawKind::Overshoot => &self.overshoot,
            LawKind::Undershoot => &self.undershoot,
            LawKind::MaxUndershoot => &self.max_undershoot,
        }
    }
}

fn binomial_se(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

/// RNG for path number `index`: one ChaCha stream per path, keyed by the root seed.
pub(crate) fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs paths until `n_target_ruined` ruins at `u` are collected and tabulates the
/// conditional laws of overshoot, undershoot and max-undershoot on `grid`.
pub fn estimate_conditional_laws(
    p: &GtscParams,
    u: f64,
    n_target_ruined: u64,
    scheme: &SimScheme,
    grid: &[f64],
    workers: usize,
) -> Result<ConditionalEstimate> {
    let mut out =
        estimate_conditional_laws_multi(p, &[u], n_target_ruined, scheme, grid, workers, None)?;
    Ok(out.remove(0))
}

/// As [`estimate_conditional_laws`] for several ascending levels along the same paths.
/// Paths are added until the highest level, and hence every level, has `n_target_ruined`
/// ruins. Every path's events, in path order, are passed to `sink` when given.
#[allow(clippy::type_complexity)]
pub fn estimate_conditional_laws_multi(
    p: &GtscParams,
    levels: &[f64],
    n_target_ruined: u64,
    scheme: &SimScheme,
    grid: &[f64],
    workers: usize,
    mut sink: Option<&mut dyn FnMut(u64, &[RuinEvent]) -> Result<()>>,
) -> Result<Vec<ConditionalEstimate>> {
    check_levels(levels)?;
    check_grid(grid)?;
    if n_target_ruined == 0 {
        return Err(Error::domain(
            "target number of ruined paths must be at least 1",
        ));
    }
    let workers = workers.max(1);
    let k = PathConstants::new(p, scheme)?;
    let n_levels = levels.len();

    let mut samples: Vec<[Vec<f64>; 3]> = (0..n_levels).map(|_| Default::default()).collect();
    let mut crept = vec![0u64; n_levels];
    let mut censored = vec![0u64; n_levels];
    let mut tau_sum = vec![0.0f64; n_levels];
    let mut n_paths = 0u64;

    while samples[n_levels - 1][0].len() < n_target_ruined as usize {
        if n_paths >= scheme.path_budget {
            if samples[0][0].is_empty() {
                return Err(Error::Estimation(format!(
                    "no ruin observed in {n_paths} paths; raise the path budget or lower u"
                )));
            }
            break;
        }
        let batch = BATCH.min(scheme.path_budget - n_paths);
        let start = n_paths;
        let results = run_batch(p, &k, levels, scheme, start, batch, workers);
        for (offset, events) in results.iter().enumerate() {
            if let Some(sink) = sink.as_mut() {
                sink(start + offset as u64, events)?;
            }
            for (i, e) in events.iter().enumerate() {
                if e.censored {
                    censored[i] += 1;
                }
                if e.ruined {
                    samples[i][0].push(e.overshoot);
                    samples[i][1].push(e.undershoot);
                    samples[i][2].push(e.max_undershoot);
                    tau_sum[i] += e.tau;
                    if e.crept {
                        crept[i] += 1;
                    }
                }
            }
        }
        n_paths += batch;
    }

    let mut out = Vec::with_capacity(n_levels);
    for (i, &u) in levels.iter().enumerate() {
        let n_ruined = samples[i][0].len() as u64;
        let ruin_fraction = n_ruined as f64 / n_paths as f64;
        let ruin_se = binomial_se(ruin_fraction, n_paths);
        let make = |values: &mut Vec<f64>| {
            values.sort_by(f64::total_cmp);
            let cdf = grid
                .iter()
                .map(|&x| {
                    if n_ruined == 0 {
                        f64::NAN
                    } else {
                        values.partition_point(|v| *v <= x) as f64 / n_ruined as f64
                    }
                })
                .collect();
            EmpiricalCdf {
                grid: grid.to_vec(),
                values: cdf,
                n_ruined,
                ruin_fraction,
                ruin_half_width: Z95 * ruin_se,
            }
        };
        let [over, under, max_under] = &mut samples[i];
        let creep_fraction = if n_ruined == 0 {
            f64::NAN
        } else {
            crept[i] as f64 / n_ruined as f64
        };
        out.push(ConditionalEstimate {
            u,
            overshoot: make(over),
            undershoot: make(under),
            max_undershoot: make(max_under),
            creep_fraction,
            creep_standard_error: binomial_se(creep_fraction, n_ruined),
            n_paths,
            n_ruined,
            n_censored: censored[i],
            ruin_fraction,
            ruin_standard_error: ruin_se,
            mean_tau: if n_ruined == 0 {
                f64::NAN
            } else {
                tau_sum[i] / n_ruined as f64
            },
        });
    }
    Ok(out)
}

/// Simulates paths `start .. start + count`, splitting them into contiguous chunks over
/// `workers` threads; the output is in path order.
fn run_batch(
    p: &GtscParams,
    k: &PathConstants,
    levels: &[f64],
    scheme: &SimScheme,
    start: u64,
    count: u64,
    workers: usize,
) -> Vec<Vec<RuinEvent>> {
    let simulate = |from: u64, to: u64| -> Vec<Vec<RuinEvent>> {
        (from..to)
            .map(|i| run_path(p, k, levels, scheme, &mut path_rng(scheme.seed, i)))
            .collect()
    };
    if workers == 1 {
        return simulate(start, start + count);
    }
    let chunk = count.div_ceil(workers as u64);
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers as u64)
            .map(|w| {
                let from = (start + w * chunk).min(start + count);
                let to = (from + chunk).min(start + count);
                s.spawn(move || simulate(from, to))
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("simulation worker panicked"))
            .collect()
    })
}

pub const EVENT_CSV_HEADER: &str = "ruined,tau,overshoot,undershoot,max_undershoot,crept";

/// Writes one CSV row per event (non-ruined rows leave the numeric columns empty).
pub fn write_events_csv<W: Write>(out: &mut W, events: &[RuinEvent]) -> std::io::Result<()> {
    for e in events {
        if e.ruined {
            writeln!(
                out,
                "1,{:.17e},{:.17e},{:.17e},{:.17e},{}",
                e.tau,
                e.overshoot,
                e.undershoot,
                e.max_undershoot,
                u8::from(e.crept)
            )?;
        } else {
            writeln!(out, "0,,,,,0")?;
        }
    }
    Ok(())
}

//! Monte Carlo engine for the GTSC claim-surplus process.
//!
//! Jumps of size at least ε are simulated exactly as a compound Poisson process; smaller
//! jumps are replaced by their compensator and, optionally, a Brownian term of matching
//! variance. The diffusion is sub-stepped and the maximum inside each sub-step is drawn
//! from the Brownian-bridge law, so crossings and the running maximum are not missed
//! between grid points.

mod estimate;
mod path;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GtscParams, Regime, RegimeReport};
use crate::special_functions::{integrate_singular, upper_incomplete_gamma, QuadratureSpec};

pub(crate) use estimate::path_rng;
pub use estimate::{
    estimate_conditional_laws, estimate_conditional_laws_multi, write_events_csv,
    ConditionalEstimate, EmpiricalCdf, EVENT_CSV_HEADER,
};
pub use path::{simulate_first_passage, simulate_first_passages, simulate_position, RuinEvent};

/// Ratio between the ruin probability at u and the analytic bound on revival from −M.
const REVIVAL_FRACTION: f64 = 1e-6;

/// Simulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimScheme {
    /// Jumps below this size are replaced by drift (and optional Gaussian noise).
    pub epsilon: f64,
    /// Add ∫₀^ε y²Π_X(dy) to the Brownian variance. A continuous crossing then counts as
    /// creeping with probability 2d_H/σ² only; otherwise it is a jump below ε.
    pub use_gaussian_correction: bool,
    /// Diffusion sub-step.
    pub dt: f64,
    /// A path that falls below −barrier is declared not ruined.
    pub barrier: f64,
    /// Hard time cap; paths reaching it are censored.
    pub horizon: f64,
    pub seed: u64,
    /// Upper bound on the number of simulated paths in an estimation run.
    pub path_budget: u64,
    /// Truncation level used while the path is far below both its running maximum and
    /// the next reserve level; the jumps below it are replaced by drift and Gaussian noise
    /// of matched variance.
    pub far_epsilon: f64,
    /// Distance below min(running maximum, level) beyond which `far_epsilon` applies;
    /// `f64::INFINITY` disables the coarse mode.
    pub far_distance: f64,
}

impl SimScheme {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("dt", self.dt),
            ("barrier", self.barrier),
            ("horizon", self.horizon),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.path_budget == 0 {
            return Err(Error::invalid("path budget must be at least 1"));
        }
        if self.far_distance.is_finite() {
            if !(self.far_epsilon >= self.epsilon && self.far_epsilon.is_finite()) {
                return Err(Error::invalid(format!(
                    "far epsilon must be finite and at least epsilon, got {}",
                    self.far_epsilon
                )));
            }
            if !(self.far_distance >= 2.0 * self.far_epsilon) {
                return Err(Error::invalid(format!(
                    "far distance must be at least twice the far epsilon, got {}",
                    self.far_distance
                )));
            }
        } else if self.far_distance != f64::INFINITY {
            return Err(Error::invalid("far distance must be positive or +infinity"));
        }
        Ok(())
    }

    /// Default scheme for a model and reserve level.
    ///
    /// ε = 0.05 when d_H > 0, else ε = 1e−3, with the Gaussian correction; barrier
    /// M = ln(1e6)/κ, so that the revival bound e^{−κM} is 1e−6 of the ruin probability;
    /// dt = 0.01; horizon 50 (u + M)/q; coarse truncation at 1 more than 10 below the
    /// running maximum and the level.
    pub fn default_for(p: &GtscParams, report: &RegimeReport, u: f64, seed: u64) -> Result<Self> {
        p.validate()?;
        let kappa = match report.regime {
            Regime::Cramer => report.nu0.unwrap_or(p.alpha),
            _ => p.alpha,
        };
        let epsilon = if p.d_h > 0.0 { 0.05 } else { 1e-3 };
        let barrier = (1.0 / REVIVAL_FRACTION).ln() / kappa;
        let scheme = Self {
            epsilon,
            use_gaussian_correction: true,
            dt: 0.01,
            barrier,
            horizon: 50.0 * (u.max(0.0) + barrier) / p.q,
            seed,
            path_budget: 100_000_000,
            far_epsilon: 1.0,
            far_distance: 10.0,
        };
        scheme.validate()?;
        Ok(scheme)
    }
}

/// Poisson rate Π̄_X⁺(ε) of jumps of size at least ε.
pub fn big_jump_rate(p: &GtscParams, epsilon: f64) -> Result<f64> {
    p.pi_x_tail(epsilon)
}

/// Draws J ≥ ε with P(J > x) = (x/ε)^{−ρ−1} e^{−α(x−ε)}.
///
/// The survival function is a product, so J is the minimum of a Pareto(ε, ρ+1) variable
/// and ε plus an independent Exp(α) variable.
pub fn sample_jump_above<R: Rng + ?Sized>(p: &GtscParams, epsilon: f64, rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    let pareto = epsilon * u.powf(-1.0 / (p.rho + 1.0));
    let e: f64 = Exp1.sample(rng);
    pareto.min(epsilon + e / p.alpha)
}

/// ∫_ε^∞ y Π_X(dy) = c ε^{−ρ} e^{−αε} + Π̄_H(ε).
pub fn big_jump_mean_rate(p: &GtscParams, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(p.c * (-p.rho * epsilon.ln() - p.alpha * epsilon).exp() + p.pi_h_tail(epsilon)?)
}

/// ∫_ε^∞ y² Π_X(dy) = c ε^{1−ρ} e^{−αε} + 2c α^{ρ−1} Γ(1−ρ, αε).
pub fn big_jump_second_moment(p: &GtscParams, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let GtscParams { c, alpha, rho, .. } = *p;
    Ok(c * ((1.0 - rho) * epsilon.ln() - alpha * epsilon).exp()
        + 2.0 * c * alpha.powf(rho - 1.0) * upper_incomplete_gamma(1.0 - rho, alpha * epsilon)?)
}

/// Drift γ_ε = −q − ∫_ε^∞ y Π_X(dy) of the truncated process, so that E X₁ = −q.
pub fn compensated_drift(p: &GtscParams, epsilon: f64) -> Result<f64> {
    Ok(-p.q - big_jump_mean_rate(p, epsilon)?)
}

/// ∫₀^ε y² Π_X(dy), by quadrature of the Lévy density.
pub fn small_jump_variance(p: &GtscParams, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let order = p.rho.max(0.0);
    integrate_singular(
        |y| y * y * p.pi_x_density(y),
        0.0,
        epsilon,
        order,
        &QuadratureSpec::default(),
    )
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::domain(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    Ok(())
}

/// Per-model constants shared by all paths.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PathConstants {
    pub drift: f64,
    pub sigma: f64,
    pub jump_rate: f64,
    /// Share 2d_H/σ² of the Gaussian variance that belongs to the Brownian part.
    pub creep_share: f64,
    pub epsilon: f64,
    /// 1/(1−ρ): a crossing jump below ε has size ε·U^{1/(1−ρ)}.
    pub small_jump_power: f64,
    /// Constants of the coarse mode, when enabled.
    pub far: Option<Truncation>,
}

/// Drift, Brownian scale and big-jump rate of the process truncated at one level.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Truncation {
    pub epsilon: f64,
    pub drift: f64,
    pub sigma: f64,
    pub jump_rate: f64,
}

impl Truncation {
    fn new(p: &GtscParams, epsilon: f64, gaussian_correction: bool) -> Result<Self> {
        let mut variance = 2.0 * p.d_h;
        if gaussian_correction {
            variance += small_jump_variance(p, epsilon)?;
        }
        Ok(Self {
            epsilon,
            drift: compensated_drift(p, epsilon)?,
            sigma: variance.sqrt(),
            jump_rate: big_jump_rate(p, epsilon)?,
        })
    }
}

impl PathConstants {
    pub(crate) fn new(p: &GtscParams, scheme: &SimScheme) -> Result<Self> {
        p.validate()?;
        scheme.validate()?;
        let near = Truncation::new(p, scheme.epsilon, scheme.use_gaussian_correction)?;
        let far = if scheme.far_distance.is_finite() {
            Some(Truncation::new(p, scheme.far_epsilon, true)?)
        } else {
            None
        };
        Ok(Self {
            drift: near.drift,
            sigma: near.sigma,
            jump_rate: near.jump_rate,
            creep_share: if near.sigma > 0.0 {
                2.0 * p.d_h / (near.sigma * near.sigma)
            } else {
                1.0
            },
            epsilon: scheme.epsilon,
            small_jump_power: 1.0 / (1.0 - p.rho),
            far,
        })
    }
}

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::Serialize;

use super::{sample_jump_above, PathConstants, SimScheme};
use crate::error::{Error, Result};
use crate::model::GtscParams;

/// Outcome of one path with respect to one reserve level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RuinEvent {
    pub ruined: bool,
    /// Passage time; meaningful only when `ruined`.
    pub tau: f64,
    /// X_{τ_u} − u.
    pub overshoot: f64,
    /// u − X_{τ_u−}.
    pub undershoot: f64,
    /// u − X̄_{τ_u−}.
    pub max_undershoot: f64,
    /// Crossed during a diffusion sub-step rather than by a jump.
    pub crept: bool,
    /// The horizon was reached before either ruin or the barrier.
    pub censored: bool,
}

impl RuinEvent {
    fn survived(censored: bool) -> Self {
        Self {
            ruined: false,
            tau: f64::NAN,
            overshoot: f64::NAN,
            undershoot: f64::NAN,
            max_undershoot: f64::NAN,
            crept: false,
            censored,
        }
    }
}

/// Beyond this many standard deviations above the larger endpoint the bridge maximum
/// is not sampled (exceedance probability below e^{−128}).
const BRIDGE_CUTOFF_SD: f64 = 8.0;

/// First passage above `u` for one path.
pub fn simulate_first_passage<R: Rng + ?Sized>(
    p: &GtscParams,
    u: f64,
    scheme: &SimScheme,
    rng: &mut R,
) -> Result<RuinEvent> {
    Ok(simulate_first_passages(p, &[u], scheme, rng)?[0])
}

/// First passages above each of the ascending `levels` along a single path.
pub fn simulate_first_passages<R: Rng + ?Sized>(
    p: &GtscParams,
    levels: &[f64],
    scheme: &SimScheme,
    rng: &mut R,
) -> Result<Vec<RuinEvent>> {
    check_levels(levels)?;
    let k = PathConstants::new(p, scheme)?;
    Ok(run_path(p, &k, levels, scheme, rng))
}

pub(crate) fn check_levels(levels: &[f64]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::domain("at least one reserve level is required"));
    }
    if levels.iter().any(|u| !(*u > 0.0 && u.is_finite())) {
        return Err(Error::domain("reserve levels must be positive and finite"));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("reserve levels must be strictly ascending"));
    }
    Ok(())
}

/// Below this fraction of `far_distance` under the switching line the coarse mode ends.
const FAR_EXIT_ROOM: f64 = 0.02;

pub(crate) fn run_path<R: Rng + ?Sized>(
    p: &GtscParams,
    k: &PathConstants,
    levels: &[f64],
    scheme: &SimScheme,
    rng: &mut R,
) -> Vec<RuinEvent> {
    let mut events = Vec::with_capacity(levels.len());
    let mut next = 0; // first level not yet crossed
    let (mut t, mut x, mut xbar) = (0.0_f64, 0.0_f64, 0.0_f64);
    let diffusive = k.sigma > 0.0;

    'path: loop {
        // Coarse mode: far below both the running maximum and the next level, where
        // neither can change before the path returns to the fine zone.
        if let Some(far) = &k.far {
            let line = xbar.min(levels[next]) - scheme.far_distance;
            if x < line - FAR_EXIT_ROOM * scheme.far_distance {
                let jump_at = t + exponential(rng, far.jump_rate);
                loop {
                    let room = line - x;
                    if room < FAR_EXIT_ROOM * scheme.far_distance {
                        // back to the fine zone; the pending jump epoch is discarded
                        // (memoryless) and redrawn at the fine rate
                        continue 'path;
                    }
                    let cap = (room / (BRIDGE_CUTOFF_SD * far.sigma)).powi(2);
                    let h = cap.min(jump_at - t);
                    let z: f64 = StandardNormal.sample(rng);
                    x += far.drift * h + far.sigma * h.sqrt() * z;
                    t += h;
                    if x < -scheme.barrier || t >= scheme.horizon {
                        break 'path;
                    }
                    if t >= jump_at {
                        break;
                    }
                }
                let before = x;
                x += sample_jump_above(p, far.epsilon, rng);
                jump_crossings(levels, &mut next, &mut events, t, before, x, xbar);
                xbar = xbar.max(x);
                if next == levels.len() {
                    break 'path;
                }
                continue 'path;
            }
        }

        let jump_at = t + exponential(rng, k.jump_rate);

        // continuous motion up to the next jump epoch
        if diffusive {
            while t < jump_at {
                let h = scheme.dt.min(jump_at - t);
                let z: f64 = StandardNormal.sample(rng);
                let a = x;
                let b = a + k.drift * h + k.sigma * h.sqrt() * z;
                let top = a.max(b);
                let reach = top + BRIDGE_CUTOFF_SD * k.sigma * h.sqrt();
                let peak = if reach > xbar || reach > levels[next] {
                    let v: f64 = 1.0 - rng.random::<f64>();
                    let spread = (b - a) * (b - a) - 2.0 * k.sigma * k.sigma * h * v.ln();
                    0.5 * (a + b + spread.sqrt())
                } else {
                    top
                };
                while next < levels.len() && peak > levels[next] {
                    let u = levels[next];
                    let frac = if b > u {
                        ((u - a) / (b - a)).clamp(0.0, 1.0)
                    } else {
                        0.5
                    };
                    let mut event = RuinEvent {
                        ruined: true,
                        tau: t + frac * h,
                        overshoot: 0.0,
                        undershoot: 0.0,
                        max_undershoot: 0.0,
                        crept: true,
                        censored: false,
                    };
                    // the Gaussian stand-in for the small jumps cannot creep: such a
                    // crossing is a jump below ε
                    if k.creep_share < 1.0 && rng.random::<f64>() >= k.creep_share {
                        let jump = small_jump(k, rng);
                        let over = jump * rng.random::<f64>();
                        event.crept = false;
                        event.overshoot = over;
                        event.undershoot = jump - over;
                        event.max_undershoot = event.undershoot.min(u - xbar).max(0.0);
                    }
                    events.push(event);
                    next += 1;
                }
                t += h;
                x = b;
                xbar = xbar.max(peak);
                if next == levels.len() {
                    break 'path;
                }
                if x < -scheme.barrier {
                    break 'path;
                }
                if t >= scheme.horizon {
                    break 'path;
                }
            }
        } else {
            // pure drift, which is negative: no crossing between jumps
            let stop = jump_at.min(scheme.horizon);
            x += k.drift * (stop - t);
            t = stop;
            if x < -scheme.barrier || t >= scheme.horizon {
                break 'path;
            }
        }

        let before = x;
        x += sample_jump_above(p, scheme.epsilon, rng);
        jump_crossings(levels, &mut next, &mut events, t, before, x, xbar);
        xbar = xbar.max(x);
        if next == levels.len() {
            break;
        }
    }
    let censored = t >= scheme.horizon && x >= -scheme.barrier;
    while events.len() < levels.len() {
        events.push(RuinEvent::survived(censored));
    }
    events
}

fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    if rate > 0.0 {
        let e: f64 = Exp1.sample(rng);
        e / rate
    } else {
        f64::INFINITY
    }
}

/// Size of a jump below ε that crosses a level, with density ∝ x^{−ρ} on (0, ε); the
/// level sits uniformly on it, which gives the x^{−ρ} shape of the limit densities at 0.
fn small_jump<R: Rng + ?Sized>(k: &PathConstants, rng: &mut R) -> f64 {
    k.epsilon * (1.0 - rng.random::<f64>()).powf(k.small_jump_power)
}

/// Records every level strictly passed by a jump from `before` to `after` at time `t`.
fn jump_crossings(
    levels: &[f64],
    next: &mut usize,
    events: &mut Vec<RuinEvent>,
    t: f64,
    before: f64,
    after: f64,
    xbar: f64,
) {
    while *next < levels.len() && after > levels[*next] {
        let u = levels[*next];
        events.push(RuinEvent {
            ruined: true,
            tau: t,
            overshoot: after - u,
            undershoot: u - before,
            max_undershoot: u - xbar.max(before).min(u),
            crept: false,
            censored: false,
        });
        *next += 1;
    }
}

/// X_t for a single path with no reserve level, for calibration.
pub fn simulate_position<R: Rng + ?Sized>(
    p: &GtscParams,
    t_end: f64,
    scheme: &SimScheme,
    rng: &mut R,
) -> Result<f64> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::domain(format!(
            "time must be finite and nonnegative, got {t_end}"
        )));
    }
    let k = PathConstants::new(p, scheme)?;
    let mut x = k.drift * t_end;
    if k.sigma > 0.0 {
        let z: f64 = StandardNormal.sample(rng);
        x += k.sigma * t_end.sqrt() * z;
    }
    let mut t = 0.0;
    loop {
        t += exponential(rng, k.jump_rate);
        if t > t_end {
            break;
        }
        x += sample_jump_above(p, scheme.epsilon, rng);
    }
    Ok(x)
}

//! Closed-form limit laws for the GTSC class with ρ ∈ (0, 1).

use super::LawKind;
use crate::error::{Error, Result};
use crate::model::{gamma_neg_rho, GtscParams, Regime, RegimeReport};
use crate::special_functions::{upper_incomplete_gamma, upper_incomplete_gamma_scaled};

/// Below this x the small-argument forms (built on `kernel_k`) are used for the overshoot.
fn small_x_threshold(alpha: f64) -> f64 {
    1.0_f64.min(1.0 / alpha)
}

/// Closed-form evaluator bound to one parameter point and its regime constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtscLaws {
    p: GtscParams,
    regime: Regime,
    kappa: f64,
    /// α − ν₀ in the Cramér regime, 0 in the convolution-equivalent regime.
    gap: f64,
    beta2: f64,
    gamma_neg_rho: f64,
}

impl GtscLaws {
    pub fn new(p: &GtscParams, report: &RegimeReport) -> Result<Self> {
        p.validate()?;
        if !(p.rho > 0.0 && p.rho < 1.0) {
            return Err(Error::domain(format!(
                "closed-form laws need rho in (0, 1), got {}",
                p.rho
            )));
        }
        let (kappa, gap, beta2) = match report.regime {
            Regime::Cramer => {
                let nu0 = report.nu0.ok_or_else(|| Error::state("report lacks nu0"))?;
                let gap = report.alpha_minus_nu0.unwrap_or(p.alpha - nu0);
                (nu0, gap, 0.0)
            }
            Regime::ConvolutionEquivalent => {
                let beta2 = report
                    .beta2
                    .ok_or_else(|| Error::state("report lacks beta2"))?;
                (p.alpha, 0.0, beta2)
            }
            Regime::Boundary => return Err(boundary_error()),
        };
        Ok(Self {
            p: *p,
            regime: report.regime,
            kappa,
            gap,
            beta2,
            gamma_neg_rho: gamma_neg_rho(p.rho),
        })
    }

    pub fn params(&self) -> &GtscParams {
        &self.p
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// ν₀ or α.
    pub fn exponent(&self) -> f64 {
        self.kappa
    }

    pub fn beta2(&self) -> f64 {
        self.beta2
    }

    /// Creep probability κ d_H / q.
    pub fn creep_probability(&self) -> f64 {
        self.kappa * self.p.d_h / self.p.q
    }

    /// Creep probability in the form 1 + (c/q)Γ(−ρ)(α^ρ − (α−ν₀)^ρ), resp.
    /// 1 − β₂ + (c/q)α^ρΓ(−ρ).
    pub fn creep_probability_from_tails(&self) -> f64 {
        let GtscParams {
            q, c, alpha, rho, ..
        } = self.p;
        match self.regime {
            Regime::Cramer => {
                1.0 + c / q * self.gamma_neg_rho * (alpha.powf(rho) - self.gap.powf(rho))
            }
            _ => 1.0 - self.beta2 + c / q * alpha.powf(rho) * self.gamma_neg_rho,
        }
    }

    /// Limit of the CDF as x → ∞: 1, or 1 − β₂ for the undershoots in the CE regime.
    pub fn total_mass(&self, kind: LawKind) -> f64 {
        match kind {
            LawKind::Overshoot => 1.0,
            _ => 1.0 - self.beta2,
        }
    }

    /// Mass escaping to infinity (β₂ for the CE undershoots, else 0).
    pub fn mass_at_infinity(&self, kind: LawKind) -> f64 {
        1.0 - self.total_mass(kind)
    }

    /// Limit CDF at x, clipped to [0, 1] against rounding.
    pub fn cdf(&self, kind: LawKind, x: f64) -> Result<f64> {
        Ok(self.cdf_unclipped(kind, x)?.clamp(0.0, 1.0))
    }

    fn cdf_unclipped(&self, kind: LawKind, x: f64) -> Result<f64> {
        check_x(x)?;
        let GtscParams { q, c, alpha, .. } = self.p;
        match kind {
            LawKind::Overshoot => {
                if x == 0.0 {
                    return Ok(self.creep_probability_from_tails());
                }
                Ok(1.0 - self.overshoot_defect(x)?)
            }
            LawKind::Undershoot => Ok(self.creep_probability()
                + c / q * (self.kernel_k(alpha, x)? - self.kernel_k(self.gap, x)?)),
            LawKind::MaxUndershoot => {
                let row2 = self.cdf_unclipped(LawKind::Undershoot, x)?;
                if x == 0.0 {
                    return Ok(row2);
                }
                // (e^{κx} − 1)Π̄_H(x), tilted form once e^{κx} can overflow
                let lift = if self.kappa * x < 1.0 {
                    (self.kappa * x).exp_m1() * self.p.pi_h_tail(x)?
                } else {
                    let tilted = c * (-self.gap * x).exp() * self.j_scaled(alpha, x)?;
                    tilted - self.p.pi_h_tail(x)?
                };
                Ok(row2 + lift / q)
            }
        }
    }

    /// `total_mass(kind) − cdf(kind, x)`, evaluated without cancellation for large x.
    pub fn defect(&self, kind: LawKind, x: f64) -> Result<f64> {
        check_x(x)?;
        if kind == LawKind::Overshoot {
            return if x == 0.0 {
                Ok(1.0 - self.creep_probability_from_tails())
            } else {
                self.overshoot_defect(x)
            };
        }
        if x <= small_x_threshold(self.p.alpha) {
            return Ok(self.total_mass(kind) - self.cdf_unclipped(kind, x)?);
        }
        let GtscParams {
            q, c, alpha, rho, ..
        } = self.p;
        let js_alpha = self.j_scaled(alpha, x)?;
        let v = match (self.regime, kind) {
            (Regime::Cramer, LawKind::Undershoot) => {
                let js_gap = self.j_scaled(self.gap, x)?;
                (-self.gap * x).exp() * js_gap - (-alpha * x).exp() * js_alpha
            }
            (Regime::Cramer, _) => (-self.gap * x).exp() * (self.j_scaled(self.gap, x)? - js_alpha),
            (_, LawKind::Undershoot) => x.powf(-rho) / rho - (-alpha * x).exp() * js_alpha,
            _ => x.powf(-rho) / rho - js_alpha,
        };
        Ok(c / q * v)
    }

    /// Leading-order behaviour of `defect(kind, x)` as x → ∞.
    pub fn tail_asymptotic(&self, kind: LawKind, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(format!(
                "tail asymptotics need x > 0, got {x}"
            )));
        }
        let GtscParams {
            q, c, alpha, rho, ..
        } = self.p;
        let power = x.powf(-rho - 1.0);
        Ok(match (self.regime, kind) {
            (Regime::Cramer, LawKind::Overshoot) => {
                c / q * (1.0 / self.gap - 1.0 / alpha) * power * (-alpha * x).exp()
            }
            (Regime::Cramer, LawKind::Undershoot) => {
                c / (q * self.gap) * power * (-self.gap * x).exp()
            }
            (Regime::Cramer, _) => {
                c / q * (1.0 / self.gap - 1.0 / alpha) * power * (-self.gap * x).exp()
            }
            (_, LawKind::Overshoot) => self.beta2 * (-alpha * x).exp(),
            _ => c * x.powf(-rho) / (rho * q),
        })
    }

    /// `defect / tail_asymptotic`, computed in scaled form so that it stays finite where
    /// both numerator and denominator underflow.
    pub fn tail_ratio(&self, kind: LawKind, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(format!(
                "tail asymptotics need x > 0, got {x}"
            )));
        }
        let GtscParams {
            q, c, alpha, rho, ..
        } = self.p;
        if x <= small_x_threshold(alpha) {
            return Ok(self.defect(kind, x)? / self.tail_asymptotic(kind, x)?);
        }
        let js_alpha = self.j_scaled(alpha, x)?;
        let power = x.powf(rho + 1.0);
        Ok(match (self.regime, kind) {
            (Regime::Cramer, LawKind::Undershoot) => {
                let js_gap = self.j_scaled(self.gap, x)?;
                (js_gap - (-self.kappa * x).exp() * js_alpha) * self.gap * power
            }
            (Regime::Cramer, _) => {
                let js_gap = self.j_scaled(self.gap, x)?;
                (js_gap - js_alpha) * power / (1.0 / self.gap - 1.0 / alpha)
            }
            (_, LawKind::Overshoot) => 1.0 + c / (q * self.beta2) * (x.powf(-rho) / rho - js_alpha),
            (_, LawKind::Undershoot) => 1.0 - rho * x.powf(rho) * (-alpha * x).exp() * js_alpha,
            _ => 1.0 - rho * x.powf(rho) * js_alpha,
        })
    }

    /// First x in 1, 2, 4, … where the tail asymptotic drops below `tol`; serves as the
    /// x → ∞ horizon in mass checks.
    pub fn horizon(&self, kind: LawKind, tol: f64) -> Result<f64> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::domain(format!(
                "horizon tolerance must be in (0, 1), got {tol}"
            )));
        }
        let mut x = 1.0;
        for _ in 0..400 {
            if self.tail_asymptotic(kind, x)? < tol {
                return Ok(x);
            }
            x *= 2.0;
        }
        Err(Error::domain(format!(
            "no horizon found for tolerance {tol}"
        )))
    }

    fn overshoot_defect(&self, x: f64) -> Result<f64> {
        let GtscParams {
            q, c, alpha, rho, ..
        } = self.p;
        let g = self.gamma_neg_rho;
        if x <= small_x_threshold(alpha) {
            let xr = x.powf(-rho) / rho;
            let k_alpha = self.kernel_k(alpha, x)?;
            let v = match self.regime {
                Regime::Cramer => {
                    let damp = (-self.kappa * x).exp();
                    (-self.kappa * x).exp_m1() * xr
                        + g * (damp * self.gap.powf(rho) - alpha.powf(rho))
                        + damp * self.kernel_k(self.gap, x)?
                        - k_alpha
                }
                _ => {
                    return Ok(self.beta2 * (-alpha * x).exp()
                        + c / q * ((-alpha * x).exp_m1() * xr - g * alpha.powf(rho) - k_alpha));
                }
            };
            return Ok(c / q * v);
        }
        let js_alpha = self.j_scaled(alpha, x)?;
        let damp = (-alpha * x).exp();
        Ok(match self.regime {
            Regime::Cramer => c / q * damp * (self.j_scaled(self.gap, x)? - js_alpha),
            _ => damp * (self.beta2 + c / q * (x.powf(-rho) / rho - js_alpha)),
        })
    }

    /// e^{ax}·∫_x^∞ y^{−ρ−1}e^{−ay} dy = a^ρ e^{ax} Γ(−ρ, ax).
    fn j_scaled(&self, a: f64, x: f64) -> Result<f64> {
        let rho = self.p.rho;
        Ok(a.powf(rho) * upper_incomplete_gamma_scaled(-rho, a * x)?)
    }

    /// ∫₀^x y^{−ρ−1}(1 − e^{−ay}) dy.
    fn kernel_k(&self, a: f64, x: f64) -> Result<f64> {
        if a == 0.0 || x == 0.0 {
            return Ok(0.0);
        }
        let rho = self.p.rho;
        Ok(a.powf(rho) * truncated_stable_integral(rho, a * x)?)
    }
}

/// L(ρ, z) = ∫₀^z y^{−ρ−1}(1 − e^{−y}) dy for ρ < 1.
///
/// Power series up to z = 2, then L(ρ, 2) plus the closed-form remainder
/// ∫₂^z y^{−ρ−1} dy − (Γ(−ρ, 2) − Γ(−ρ, z)).
pub(crate) fn truncated_stable_integral(rho: f64, z: f64) -> Result<f64> {
    const SPLIT: f64 = 2.0;
    if z <= SPLIT {
        return Ok(stable_series(rho, z));
    }
    let head = stable_series(rho, SPLIT);
    let log_ratio = (z / SPLIT).ln();
    let power = if rho == 0.0 {
        log_ratio
    } else {
        -SPLIT.powf(-rho) * (-rho * log_ratio).exp_m1() / rho
    };
    let tail = upper_incomplete_gamma(-rho, SPLIT)? - upper_incomplete_gamma(-rho, z)?;
    Ok(head + power - tail)
}

fn stable_series(rho: f64, z: f64) -> f64 {
    // Σ_{n≥1} (−1)^{n+1} z^{n−ρ} / (n! (n − ρ))
    let mut term = 1.0;
    let mut sum = 0.0;
    for n in 1..200 {
        let nf = n as f64;
        term *= -z / nf;
        let contribution = -term / (nf - rho);
        sum += contribution;
        if contribution.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum * z.powf(-rho)
}

fn check_x(x: f64) -> Result<()> {
    if !(x >= 0.0) || x.is_infinite() {
        return Err(Error::domain(format!(
            "limit laws need finite x >= 0, got {x}"
        )));
    }
    Ok(())
}

pub(crate) fn boundary_error() -> Error {
    Error::state(
        "the model lies on the regime boundary (f(alpha) = 0 within tolerance), where \
         neither the Cramer nor the convolution-equivalent limit theory applies",
    )
}

/// Ruin probability asymptotic in closed GTSC form:
/// q(α−ν₀)^{1−ρ} e^{−ν₀u} / (ν₀(d_H(α−ν₀)^{1−ρ} + cΓ(1−ρ))) (Cramér) or
/// c q u^{−ρ−1} e^{−αu} / (α(q β₂)²) (convolution equivalent).
pub fn ruin_probability_asymptotic(p: &GtscParams, report: &RegimeReport, u: f64) -> Result<f64> {
    check_u(u)?;
    let GtscParams {
        q,
        d_h,
        c,
        alpha,
        rho,
    } = *p;
    match report.regime {
        Regime::Cramer => {
            let nu0 = report.nu0.ok_or_else(|| Error::state("report lacks nu0"))?;
            let gap = report.alpha_minus_nu0.unwrap_or(alpha - nu0);
            let shape = if rho == 0.0 {
                1.0
            } else {
                -rho * gamma_neg_rho(rho)
            };
            let g = gap.powf(1.0 - rho);
            Ok(q * g / (nu0 * (d_h * g + c * shape)) * (-nu0 * u).exp())
        }
        Regime::ConvolutionEquivalent => {
            let denom = q - alpha * d_h + c * alpha.powf(rho) * gamma_neg_rho(rho);
            Ok(c * q / (alpha * denom * denom) * u.powf(-rho - 1.0) * (-alpha * u).exp())
        }
        Regime::Boundary => Err(boundary_error()),
    }
}

/// Ruin probability asymptotic in ladder form: q e^{−ν₀u}/(ν₀ m*) (Cramér) or
/// Π̄_X⁺(u)/(β₁β₂) (convolution equivalent).
pub fn ruin_probability_ladder_form(p: &GtscParams, report: &RegimeReport, u: f64) -> Result<f64> {
    check_u(u)?;
    match report.regime {
        Regime::Cramer => {
            let nu0 = report.nu0.ok_or_else(|| Error::state("report lacks nu0"))?;
            let m_star = report
                .m_star
                .ok_or_else(|| Error::state("report lacks m_star"))?;
            Ok(p.q * (-nu0 * u).exp() / (nu0 * m_star))
        }
        Regime::ConvolutionEquivalent => {
            let b1 = report
                .beta1
                .ok_or_else(|| Error::state("report lacks beta1"))?;
            let b2 = report
                .beta2
                .ok_or_else(|| Error::state("report lacks beta2"))?;
            Ok(p.pi_x_tail(u)? / (b1 * b2))
        }
        Regime::Boundary => Err(boundary_error()),
    }
}

/// Π̄_H(u)/(q β₂²); asymptotically equivalent to the other two forms in the
/// convolution-equivalent regime (not equal at finite u).
pub fn ruin_probability_ladder_tail_form(
    p: &GtscParams,
    report: &RegimeReport,
    u: f64,
) -> Result<f64> {
    check_u(u)?;
    match report.regime {
        Regime::ConvolutionEquivalent => {
            let b2 = report
                .beta2
                .ok_or_else(|| Error::state("report lacks beta2"))?;
            Ok(p.pi_h_tail(u)? / (p.q * b2 * b2))
        }
        Regime::Cramer => Err(Error::state(
            "ladder-tail form applies to the convolution-equivalent regime",
        )),
        Regime::Boundary => Err(boundary_error()),
    }
}

fn check_u(u: f64) -> Result<()> {
    if !(u > 0.0) || u.is_infinite() {
        return Err(Error::domain(format!(
            "reserve level u must be positive and finite, got {u}"
        )));
    }
    Ok(())
}

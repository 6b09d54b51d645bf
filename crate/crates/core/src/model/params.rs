use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_functions::{gamma, upper_incomplete_gamma, upper_incomplete_gamma_scaled};

/// The five GTSC parameters of a spectrally positive claim-surplus process.
///
/// `X` has mean slope `−q`, Gaussian coefficient `σ² = 2·d_h` and Lévy density
/// `c(α y^{−ρ−1} + (ρ+1) y^{−ρ−2}) e^{−αy}` on `(0, ∞)`. Its ascending ladder height
/// process is a tempered stable subordinator with drift `d_h`, Lévy density
/// `c y^{−ρ−1} e^{−αy}`, killed at rate `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtscParams {
    pub q: f64,
    pub d_h: f64,
    pub c: f64,
    pub alpha: f64,
    pub rho: f64,
}

impl GtscParams {
    pub fn new(q: f64, d_h: f64, c: f64, alpha: f64, rho: f64) -> Result<Self> {
        let p = Self {
            q,
            d_h,
            c,
            alpha,
            rho,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let Self {
            q,
            d_h,
            c,
            alpha,
            rho,
        } = *self;
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::invalid(format!(
                "q must be positive and finite, got {q}"
            )));
        }
        if !(d_h >= 0.0 && d_h.is_finite()) {
            return Err(Error::invalid(format!(
                "d_H must be nonnegative and finite, got {d_h}"
            )));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!(
                "c must be positive and finite, got {c}"
            )));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        if !(rho > -1.0 && rho < 1.0) {
            return Err(Error::invalid(format!(
                "rho must lie in (-1, 1), got {rho}"
            )));
        }
        Ok(())
    }

    /// Standard deviation of the Gaussian part per unit time.
    pub fn sigma(&self) -> f64 {
        (2.0 * self.d_h).sqrt()
    }

    /// ∫₀^∞ (e^{θy} − 1) y^{−ρ−1} e^{−αy} dy for θ ≤ α, i.e. `−Γ(−ρ)(α^ρ − (α−θ)^ρ)`,
    /// or `log(α/(α−θ))` when ρ = 0.
    pub(crate) fn tempered_exponent(&self, theta: f64) -> f64 {
        let ratio = (-theta / self.alpha).ln_1p();
        if self.rho == 0.0 {
            -ratio
        } else {
            gamma_neg_rho(self.rho) * self.alpha.powf(self.rho) * (self.rho * ratio).exp_m1()
        }
    }

    fn check_theta(&self, theta: f64) -> Result<()> {
        if theta.is_nan() || theta >= self.alpha {
            return Err(Error::domain(format!(
                "exponent argument {theta} must be below alpha = {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Laplace exponent ψ_X(θ) = log E e^{θX₁}, θ < α.
    pub fn psi_x(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        let tempered = self.tempered_exponent(theta);
        Ok(-self.q * theta + self.d_h * theta * theta + self.c * theta * tempered)
    }

    /// Laplace exponent of the killed ladder height process, θ < α; θ = α is admitted
    /// as the finite left limit when ρ ∈ (0, 1).
    pub fn psi_h(&self, theta: f64) -> Result<f64> {
        let at_edge = theta == self.alpha && self.rho > 0.0;
        if !at_edge {
            self.check_theta(theta)?;
        }
        Ok(-self.q + self.d_h * theta + self.c * self.tempered_exponent(theta))
    }

    /// Lévy density of X at y > 0.
    pub fn pi_x_density(&self, y: f64) -> f64 {
        let Self { c, alpha, rho, .. } = *self;
        c * (alpha * y.powf(-rho - 1.0) + (rho + 1.0) * y.powf(-rho - 2.0)) * (-alpha * y).exp()
    }

    /// Upper Lévy tail Π̄_X⁺(x) = c x^{−ρ−1} e^{−αx}.
    pub fn pi_x_tail(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(format!("Levy tail needs x > 0, got {x}")));
        }
        Ok(self.c * (-(self.rho + 1.0) * x.ln() - self.alpha * x).exp())
    }

    /// Lévy density of the ladder height process, c y^{−ρ−1} e^{−αy}.
    pub fn pi_h_density(&self, y: f64) -> f64 {
        self.c * (-(self.rho + 1.0) * y.ln() - self.alpha * y).exp()
    }

    /// Ladder Lévy tail Π̄_H(x) = c α^ρ Γ(−ρ, αx).
    pub fn pi_h_tail(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(format!("ladder tail needs x > 0, got {x}")));
        }
        Ok(self.c * self.alpha.powf(self.rho) * upper_incomplete_gamma(-self.rho, self.alpha * x)?)
    }

    /// e^{αx}·Π̄_H(x), finite where Π̄_H underflows.
    pub fn pi_h_tail_scaled(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(format!("ladder tail needs x > 0, got {x}")));
        }
        Ok(self.c
            * self.alpha.powf(self.rho)
            * upper_incomplete_gamma_scaled(-self.rho, self.alpha * x)?)
    }

    /// The discriminant f(α) = d_H α − q − c α^ρ Γ(−ρ) separating the two regimes.
    ///
    /// Defined for ρ ∈ (0, 1); for ρ ≤ 0 the left limit ψ_X(α−)/α is +∞ and that is
    /// what is returned.
    pub fn discriminant(&self) -> f64 {
        if self.rho <= 0.0 {
            return f64::INFINITY;
        }
        self.d_h * self.alpha
            - self.q
            - self.c * self.alpha.powf(self.rho) * gamma_neg_rho(self.rho)
    }
}

/// Γ(−ρ) for ρ ∈ (−1, 1) \ {0}.
pub(crate) fn gamma_neg_rho(rho: f64) -> f64 {
    gamma(-rho).expect("rho in (-1, 1) minus {0} keeps -rho off the poles")
}

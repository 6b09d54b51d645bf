//! Ladder data and the generic limit-law evaluators built on it.

use std::fmt;
use std::sync::Arc;

use super::gtsc::{boundary_error, GtscLaws};
use super::LawKind;
use crate::error::{Error, Result};
use crate::model::{GtscParams, Regime, RegimeReport};
use crate::special_functions::{
    integrate_singular, integrate_to_infinity, upper_incomplete_gamma_scaled, QuadratureSpec,
};

pub type TailFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type KernelFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Ascending ladder data of a spectrally positive process drifting to −∞, together with
/// the regime exponent κ (ν₀ or α).
#[derive(Clone)]
pub struct LadderModel {
    q: f64,
    d_h: f64,
    exponent: f64,
    regime: Regime,
    beta2: f64,
    pi_h_tail: TailFn,
    g_kernel: KernelFn,
    tilted_tail: TailFn,
    tilted_kernel: KernelFn,
    singularity_order: f64,
    tail_index: f64,
    quadrature: QuadratureSpec,
    closed_form: Option<GtscLaws>,
}

impl fmt::Debug for LadderModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LadderModel")
            .field("q", &self.q)
            .field("d_h", &self.d_h)
            .field("exponent", &self.exponent)
            .field("regime", &self.regime)
            .field("beta2", &self.beta2)
            .field("singularity_order", &self.singularity_order)
            .field("tail_index", &self.tail_index)
            .field("closed_form", &self.closed_form.is_some())
            .finish()
    }
}

impl LadderModel {
    /// Builds a model from Π̄_H and the undershoot kernel g_x(y).
    ///
    /// `beta2` must be 0 in the Cramér regime and lie in [0, 1) otherwise. The tilted
    /// functions default to e^{κz}Π̄_H(z) and e^{κy}g_x(y); supply them through
    /// [`with_tilted`](Self::with_tilted) when Π̄_H underflows before e^{κz} is large.
    pub fn new(
        q: f64,
        d_h: f64,
        exponent: f64,
        regime: Regime,
        beta2: f64,
        pi_h_tail: TailFn,
        g_kernel: KernelFn,
    ) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::invalid(format!("q must be positive, got {q}")));
        }
        if !(d_h >= 0.0 && d_h.is_finite()) {
            return Err(Error::invalid(format!(
                "d_H must be nonnegative, got {d_h}"
            )));
        }
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::invalid(format!(
                "exponent must be positive, got {exponent}"
            )));
        }
        match regime {
            Regime::Boundary => return Err(boundary_error()),
            Regime::Cramer if beta2 != 0.0 => {
                return Err(Error::invalid(format!(
                    "beta2 must be 0 in the Cramer regime, got {beta2}"
                )));
            }
            Regime::ConvolutionEquivalent if !(0.0..1.0).contains(&beta2) => {
                return Err(Error::invalid(format!(
                    "beta2 must lie in [0, 1), got {beta2}"
                )));
            }
            _ => {}
        }
        let tail = pi_h_tail.clone();
        let tilted_tail: TailFn = Arc::new(move |z| tilt(exponent * z, tail(z)));
        let kernel = g_kernel.clone();
        let tilted_kernel: KernelFn = Arc::new(move |x, y| tilt(exponent * y, kernel(x, y)));
        Ok(Self {
            q,
            d_h,
            exponent,
            regime,
            beta2,
            pi_h_tail,
            g_kernel,
            tilted_tail,
            tilted_kernel,
            singularity_order: 0.5,
            tail_index: 2.0,
            quadrature: QuadratureSpec::default(),
            closed_form: None,
        })
    }

    /// Replaces the tilted tail T(z) = e^{κz}Π̄_H(z) and kernel e^{κy}g_x(y).
    pub fn with_tilted(mut self, tilted_tail: TailFn, tilted_kernel: KernelFn) -> Self {
        self.tilted_tail = tilted_tail;
        self.tilted_kernel = tilted_kernel;
        self
    }

    /// Quadrature hints: algebraic order of the singularity of T at 0 and the power-law
    /// decay index of T at infinity (use 2 for exponential decay).
    pub fn with_singularity(mut self, singularity_order: f64, tail_index: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&singularity_order) {
            return Err(Error::invalid(format!(
                "singularity order must lie in [0, 1), got {singularity_order}"
            )));
        }
        if !(tail_index > 1.0) {
            return Err(Error::invalid(format!(
                "tail index must exceed 1, got {tail_index}"
            )));
        }
        self.singularity_order = singularity_order;
        self.tail_index = tail_index;
        Ok(self)
    }

    pub fn with_quadrature(mut self, spec: QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        self.quadrature = spec;
        Ok(self)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn d_h(&self) -> f64 {
        self.d_h
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn beta2(&self) -> f64 {
        self.beta2
    }

    pub fn pi_h_tail(&self, x: f64) -> f64 {
        (self.pi_h_tail)(x)
    }

    pub fn g_kernel(&self, x: f64, y: f64) -> f64 {
        (self.g_kernel)(x, y)
    }

    /// Closed forms attached by [`gtsc_ladder`] when ρ ∈ (0, 1).
    pub fn closed_form(&self) -> Option<&GtscLaws> {
        self.closed_form.as_ref()
    }

    /// κ d_H / q.
    pub fn creep_probability(&self) -> f64 {
        self.exponent * self.d_h / self.q
    }

    /// 1 for the overshoot, 1 − β₂ for the undershoots.
    pub fn total_mass(&self, kind: LawKind) -> f64 {
        match kind {
            LawKind::Overshoot => 1.0,
            _ => 1.0 - self.beta2,
        }
    }

    /// Limit CDF, using closed forms when attached and quadrature otherwise.
    pub fn cdf(&self, kind: LawKind, x: f64) -> Result<f64> {
        match &self.closed_form {
            Some(laws) => laws.cdf(kind, x),
            None => self.generic_cdf(kind, x),
        }
    }

    /// Limit CDF from the ladder data by quadrature, ignoring any closed forms.
    pub fn generic_cdf(&self, kind: LawKind, x: f64) -> Result<f64> {
        Ok(self.generic_unclipped(kind, x)?.clamp(0.0, 1.0))
    }

    fn generic_unclipped(&self, kind: LawKind, x: f64) -> Result<f64> {
        if !(x >= 0.0) || x.is_infinite() {
            return Err(Error::domain(format!(
                "limit laws need finite x >= 0, got {x}"
            )));
        }
        let kq = self.exponent / self.q;
        let creep = self.creep_probability();
        match kind {
            LawKind::Overshoot => {
                // 1 − β₂e^{−κx} − (κ/q) ∫₀^∞ e^{κw} Π̄_H(x + w) dw
                let shift = (-self.exponent * x).exp();
                let tilted = &self.tilted_tail;
                let order = if x == 0.0 {
                    self.singularity_order
                } else {
                    0.0
                };
                let integral = integrate_to_infinity(
                    |w| shift * tilted(x + w),
                    0.0,
                    order,
                    self.tail_index,
                    &self.quadrature,
                )?;
                Ok(1.0 - self.beta2 * shift - kq * integral)
            }
            LawKind::Undershoot => {
                if x == 0.0 {
                    return Ok(creep);
                }
                let kernel = &self.tilted_kernel;
                let integral = integrate_singular(
                    |y| kernel(x, y),
                    0.0,
                    x,
                    self.singularity_order,
                    &self.quadrature,
                )?;
                Ok(creep + kq * integral)
            }
            LawKind::MaxUndershoot => {
                if x == 0.0 {
                    return Ok(creep);
                }
                let tilted = &self.tilted_tail;
                let integral = integrate_singular(
                    |y| tilted(y),
                    0.0,
                    x,
                    self.singularity_order,
                    &self.quadrature,
                )?;
                Ok(creep + kq * integral)
            }
        }
    }
}

/// e^{s}·v without forming an overflowing e^{s} when v is tiny.
fn tilt(s: f64, v: f64) -> f64 {
    if v > 0.0 {
        (s + v.ln()).exp()
    } else if v == 0.0 {
        0.0
    } else {
        s.exp() * v
    }
}

/// Row I limit: P(X_{τ_u} − u ≤ x | τ_u < ∞) as u → ∞.
pub fn overshoot_cdf(m: &LadderModel, x: f64) -> Result<f64> {
    m.cdf(LawKind::Overshoot, x)
}

/// Row II limit: P(u − X_{τ_u−} ≤ x | τ_u < ∞) as u → ∞.
pub fn undershoot_cdf(m: &LadderModel, x: f64) -> Result<f64> {
    m.cdf(LawKind::Undershoot, x)
}

/// Row III limit: P(u − X̄_{τ_u−} ≤ x | τ_u < ∞) as u → ∞.
pub fn max_undershoot_cdf(m: &LadderModel, x: f64) -> Result<f64> {
    m.cdf(LawKind::MaxUndershoot, x)
}

/// Ladder model of a GTSC process. Π̄_H(x) = cα^ρΓ(−ρ, αx) and, since the descending
/// ladder height has unit drift, g_x(y) = ∫₀^{x−y} Π̄_X⁺(z + y) dz = Π̄_H(y) − Π̄_H(x).
pub fn gtsc_ladder(p: &GtscParams, report: &RegimeReport) -> Result<LadderModel> {
    p.validate()?;
    let (exponent, beta2) = match report.regime {
        Regime::Cramer => (
            report.nu0.ok_or_else(|| Error::state("report lacks nu0"))?,
            0.0,
        ),
        Regime::ConvolutionEquivalent => (
            p.alpha,
            report
                .beta2
                .ok_or_else(|| Error::state("report lacks beta2"))?,
        ),
        Regime::Boundary => return Err(boundary_error()),
    };
    let params = *p;
    let tail: TailFn = Arc::new(move |x| params.pi_h_tail(x).unwrap_or(f64::NAN));
    let t = tail.clone();
    let kernel: KernelFn = Arc::new(move |x, y| if y >= x { 0.0 } else { t(y) - t(x) });

    // e^{κz}Π̄_H(z) = cα^ρ e^{−(α−κ)z} e^{αz}Γ(−ρ, αz)
    let gap = match report.regime {
        Regime::Cramer => report.alpha_minus_nu0.unwrap_or(p.alpha - exponent),
        _ => 0.0,
    };
    let scale = p.c * p.alpha.powf(p.rho);
    let tilted_tail: TailFn = Arc::new(move |z| {
        let scaled =
            upper_incomplete_gamma_scaled(-params.rho, params.alpha * z).unwrap_or(f64::NAN);
        scale * (-gap * z).exp() * scaled
    });
    let tt = tilted_tail.clone();
    let tilted_kernel: KernelFn = Arc::new(move |x, y| {
        if y >= x {
            0.0
        } else {
            tt(y) - (-exponent * (x - y)).exp() * tt(x)
        }
    });

    let order = if p.rho > 0.0 {
        p.rho
    } else if p.rho == 0.0 {
        0.5
    } else {
        0.0
    };
    let tail_index = match report.regime {
        Regime::Cramer => 2.0,
        _ => p.rho + 1.0,
    };
    let mut model = LadderModel::new(p.q, p.d_h, exponent, report.regime, beta2, tail, kernel)?
        .with_tilted(tilted_tail, tilted_kernel)
        .with_singularity(order, tail_index)?;
    if p.rho > 0.0 {
        model.closed_form = Some(GtscLaws::new(p, report)?);
    }
    Ok(model)
}

/// Tabulated limit CDF.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CdfCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Mass the improper law places at +∞ (β₂ for the CE undershoots).
    pub mass_at_infinity: f64,
    /// Creep probability κ d_H / q.
    pub atom_at_zero: f64,
}

/// Evaluates one limit law on an ascending grid of nonnegative points.
pub fn tabulate(m: &LadderModel, kind: LawKind, grid: &[f64]) -> Result<CdfCurve> {
    check_grid(grid)?;
    let values = grid
        .iter()
        .map(|&x| m.cdf(kind, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(CdfCurve {
        grid: grid.to_vec(),
        values,
        mass_at_infinity: 1.0 - m.total_mass(kind),
        atom_at_zero: m.creep_probability(),
    })
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain("grid is empty"));
    }
    if grid.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::domain("grid points must be finite and nonnegative"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("grid must be strictly ascending"));
    }
    Ok(())
}

use serde::{Deserialize, Serialize};

use super::params::{gamma_neg_rho, GtscParams};
use crate::error::{Error, Result};
use crate::special_functions::gamma;

/// Default absolute band on f(α) inside which a model is reported as `Boundary`.
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Cramer,
    ConvolutionEquivalent,
    Boundary,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Cramer => "Cramer",
            Regime::ConvolutionEquivalent => "ConvolutionEquivalent",
            Regime::Boundary => "Boundary",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Cramer" => Ok(Regime::Cramer),
            "ConvolutionEquivalent" => Ok(Regime::ConvolutionEquivalent),
            "Boundary" => Ok(Regime::Boundary),
            other => Err(Error::invalid(format!("unknown regime '{other}'"))),
        }
    }
}

/// Outcome of [`classify`]; the optional constants are populated according to the regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// f(α); +∞ when ρ ≤ 0.
    pub f_alpha: f64,
    pub nu0: Option<f64>,
    /// α − ν₀, kept separately since ν₀ can sit within a few ulps of α near the boundary.
    pub alpha_minus_nu0: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub m_star: Option<f64>,
}

impl RegimeReport {
    /// The exponent driving the limit laws: ν₀ (Cramér) or α (convolution equivalent).
    pub fn exponent(&self, p: &GtscParams) -> Option<f64> {
        match self.regime {
            Regime::Cramer => self.nu0,
            Regime::ConvolutionEquivalent => Some(p.alpha),
            Regime::Boundary => None,
        }
    }

    /// β₂, with the convention β₂ = 0 in the Cramér regime.
    pub fn beta2_or_zero(&self) -> f64 {
        self.beta2.unwrap_or(0.0)
    }
}

/// Regime classification of a GTSC model.
pub fn classify(p: &GtscParams, boundary_tol: f64) -> Result<RegimeReport> {
    p.validate()?;
    let f_alpha = p.discriminant();
    let regime = if p.rho <= 0.0 || f_alpha > boundary_tol {
        Regime::Cramer
    } else if f_alpha < -boundary_tol {
        Regime::ConvolutionEquivalent
    } else {
        Regime::Boundary
    };
    let mut report = RegimeReport {
        regime,
        f_alpha,
        nu0: None,
        alpha_minus_nu0: None,
        beta1: None,
        beta2: None,
        m_star: None,
    };
    match regime {
        Regime::Cramer => {
            let root = solve_cramer_root(p)?;
            report.nu0 = Some(root.nu0);
            report.alpha_minus_nu0 = Some(root.gap);
            report.m_star = Some(m_star_at_gap(p, root.gap));
        }
        Regime::ConvolutionEquivalent => {
            report.beta1 = Some(-p.alpha * f_alpha);
            report.beta2 = Some(-f_alpha / p.q);
        }
        Regime::Boundary => {}
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy)]
struct CramerRoot {
    nu0: f64,
    gap: f64,
}

/// ν₀ ∈ (0, α), the positive root of ψ_X.
pub fn cramer_root(p: &GtscParams) -> Result<f64> {
    require_regime(p, Regime::Cramer)?;
    Ok(solve_cramer_root(p)?.nu0)
}

/// m* = d_H + ∫ y e^{ν₀y} Π_H(dy) = d_H + c Γ(1−ρ) (α−ν₀)^{ρ−1}.
pub fn m_star(p: &GtscParams) -> Result<f64> {
    require_regime(p, Regime::Cramer)?;
    Ok(m_star_at_gap(p, solve_cramer_root(p)?.gap))
}

/// (β₁, β₂) = (−ψ_X(α−), −ψ_H(α)/q) in the convolution-equivalent regime.
pub fn beta_constants(p: &GtscParams) -> Result<(f64, f64)> {
    require_regime(p, Regime::ConvolutionEquivalent)?;
    let f = p.discriminant();
    Ok((-p.alpha * f, -f / p.q))
}

fn require_regime(p: &GtscParams, wanted: Regime) -> Result<()> {
    p.validate()?;
    let f = p.discriminant();
    let actual = if p.rho <= 0.0 || f > DEFAULT_BOUNDARY_TOL {
        Regime::Cramer
    } else if f < -DEFAULT_BOUNDARY_TOL {
        Regime::ConvolutionEquivalent
    } else {
        Regime::Boundary
    };
    if actual != wanted {
        return Err(Error::state(format!(
            "operation requires the {wanted} regime but the model is {actual} (f(alpha) = {f})"
        )));
    }
    Ok(())
}

fn m_star_at_gap(p: &GtscParams, gap: f64) -> f64 {
    let g = gamma(1.0 - p.rho).expect("1 - rho > 0");
    p.d_h + p.c * g * gap.powf(p.rho - 1.0)
}

/// ψ_X(ν)/ν written in terms of ν (`gap = false`) or of δ = α − ν (`gap = true`).
fn scaled_exponent(p: &GtscParams, z: f64, gap: bool) -> f64 {
    if gap {
        let delta = z;
        let tempered = if p.rho == 0.0 {
            (p.alpha / delta).ln()
        } else {
            -gamma_neg_rho(p.rho) * (p.alpha.powf(p.rho) - delta.powf(p.rho))
        };
        p.d_h * (p.alpha - delta) - p.q + p.c * tempered
    } else {
        p.d_h * z - p.q + p.c * p.tempered_exponent(z)
    }
}

/// d/dν of ψ_X(ν)/ν; equals m*(ν).
fn scaled_exponent_slope(p: &GtscParams, gap: f64) -> f64 {
    m_star_at_gap(p, gap)
}

/// Bisection to a relative bracket of 1e−14 followed by one Newton step.
///
/// The root is sought in ν when it lies in (0, α/2] and in δ = α − ν otherwise, so that
/// both ν₀ ≪ α and α − ν₀ ≪ α are resolved to full relative precision.
fn solve_cramer_root(p: &GtscParams) -> Result<CramerRoot> {
    let half = 0.5 * p.alpha;
    let in_gap = scaled_exponent(p, half, false) < 0.0;
    // h increases in ν; expressed in δ it decreases, so flip the sign to keep g increasing.
    let g = |z: f64| {
        if in_gap {
            -scaled_exponent(p, z, true)
        } else {
            scaled_exponent(p, z, false)
        }
    };
    let (mut lo, mut hi) = (0.0_f64, half);
    if !(g(hi) >= 0.0) {
        return Err(Error::state("no sign change of psi_X on (0, alpha)"));
    }
    for _ in 0..5000 {
        if hi - lo <= 1e-14 * hi {
            break;
        }
        let mid = if lo == 0.0 {
            hi / 16.0
        } else if hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if mid <= lo || mid >= hi || mid == 0.0 {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut z = 0.5 * (lo + hi);
    let gap_of = |z: f64| if in_gap { z } else { p.alpha - z };
    let slope = scaled_exponent_slope(p, gap_of(z));
    // dg/dz = slope in ν; in δ the flip cancels the chain-rule sign.
    let step = g(z) / slope;
    let polished = z - step;
    if polished > lo && polished < hi && g(polished).abs() <= g(z).abs() {
        z = polished;
    }
    let (nu0, gap) = if in_gap {
        (p.alpha - z, z)
    } else {
        (z, p.alpha - z)
    };
    if !(nu0 > 0.0 && gap > 0.0) {
        return Err(Error::state(format!(
            "Cramer root left (0, alpha): nu0 = {nu0}"
        )));
    }
    Ok(CramerRoot { nu0, gap })
}

/// The tempering index α₀ at which f vanishes, the other parameters held fixed.
///
/// f is strictly increasing in α for ρ ∈ (0, 1), negative near 0 and unbounded above,
/// so the root is unique; it is bracketed by doubling and bisected to adjacent floats.
pub fn boundary_alpha(p: &GtscParams) -> Result<f64> {
    p.validate()?;
    if !(p.rho > 0.0) {
        return Err(Error::domain(format!(
            "a regime boundary in alpha exists only for rho in (0, 1), got rho = {}",
            p.rho
        )));
    }
    let f = |alpha: f64| GtscParams { alpha, ..*p }.discriminant();
    let mut hi = 1.0_f64;
    while f(hi) <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::state("failed to bracket the boundary in alpha"));
        }
    }
    let mut lo = 0.0_f64;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(if f(hi).abs() < f(lo).abs() || lo == 0.0 {
        hi
    } else {
        lo
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1(alpha: f64) -> GtscParams {
        GtscParams::new(1.0, 0.5, 1.0, alpha, 0.5).unwrap()
    }

    /// Plain bisection of ψ_X on (0, α); independent of the solver above.
    fn bisect_psi(p: &GtscParams) -> f64 {
        let (mut lo, mut hi) = (1e-300, p.alpha * (1.0 - 1e-15));
        for _ in 0..3000 {
            let mid = 0.5 * (lo + hi);
            if p.psi_x(mid).unwrap() < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// q chosen so that f(α) equals `target`.
    fn with_discriminant(base: GtscParams, target: f64) -> GtscParams {
        let q = base.d_h * base.alpha
            - base.c * base.alpha.powf(base.rho) * gamma(-base.rho).unwrap()
            - target;
        GtscParams { q, ..base }
    }

    #[test]
    fn reference_point_regimes() {
        let r = classify(&fig1(0.10), DEFAULT_BOUNDARY_TOL).unwrap();
        assert_eq!(r.regime, Regime::Cramer);
        assert!(r.beta1.is_none() && r.beta2.is_none());
        let r = classify(&fig1(0.03), DEFAULT_BOUNDARY_TOL).unwrap();
        assert_eq!(r.regime, Regime::ConvolutionEquivalent);
        assert!(r.nu0.is_none() && r.m_star.is_none());
        assert!((r.beta2.unwrap() - 0.371).abs() < 1e-3);
        for alpha in [0.01, 0.1, 1.0, 5.0] {
            let p = GtscParams::new(1.0, 0.5, 1.0, alpha, -0.5).unwrap();
            assert_eq!(
                classify(&p, DEFAULT_BOUNDARY_TOL).unwrap().regime,
                Regime::Cramer
            );
        }
    }

    #[test]
    fn boundary_band() {
        let p = with_discriminant(fig1(0.1), 1e-12);
        let r = classify(&p, DEFAULT_BOUNDARY_TOL).unwrap();
        assert_eq!(r.regime, Regime::Boundary);
        assert!(r.nu0.is_none() && r.beta1.is_none() && r.beta2.is_none() && r.m_star.is_none());
        assert!(cramer_root(&p).is_err());
        assert!(matches!(beta_constants(&p), Err(Error::State(_))));
    }

    #[test]
    fn cramer_root_matches_bisection_oracle() {
        let p = fig1(0.10);
        let nu0 = cramer_root(&p).unwrap();
        assert!((nu0 - 0.0977).abs() < 1e-4);
        assert!((nu0 - bisect_psi(&p)).abs() < 1e-13);
        assert!(p.psi_x(nu0).unwrap().abs() < 1e-12);
        assert!(p.psi_x(0.0977).unwrap().abs() < 1e-4);
    }

    #[test]
    fn cramer_root_negative_rho() {
        let p = GtscParams::new(1.0, 0.5, 1.0, 1.0, -0.5).unwrap();
        let nu0 = cramer_root(&p).unwrap();
        assert!(nu0 > 0.0 && nu0 < 1.0);
        assert!(p.psi_x(nu0).unwrap().abs() < 1e-12);
        assert!((nu0 - bisect_psi(&p)).abs() < 1e-12);
        let p0 = GtscParams::new(1.0, 0.5, 1.0, 1.0, 0.0).unwrap();
        let nu0 = cramer_root(&p0).unwrap();
        assert!(p0.psi_x(nu0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn root_approaches_alpha_near_boundary() {
        let p = with_discriminant(fig1(0.1), 1e-6);
        let r = classify(&p, DEFAULT_BOUNDARY_TOL).unwrap();
        let nu0 = r.nu0.unwrap();
        assert!(p.alpha - nu0 < 1e-3);
        assert!(r.m_star.unwrap() > 1e3);
        // ψ_X has slope ν₀m* ≈ 6e5 here, so one ulp of ν₀ already moves it by ~1e−11;
        // the residual is checked in the gap variable instead.
        let gap = r.alpha_minus_nu0.unwrap();
        assert!((nu0 + gap - p.alpha).abs() < 1e-17);
        assert!(scaled_exponent(&p, gap, true).abs() < 1e-12 * p.q.max(1.0));
    }

    #[test]
    fn root_near_zero_is_resolved() {
        // huge premium: f(α) barely positive relative to q, ν₀ close to α; tiny premium: ν₀ ≪ α
        let p = GtscParams::new(0.01, 0.5, 1.0, 1.0, -0.5).unwrap();
        let nu0 = cramer_root(&p).unwrap();
        assert!(nu0 < 0.1);
        assert!(p.psi_x(nu0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn beta_constants_values() {
        let (b1, b2) = beta_constants(&fig1(0.05)).unwrap();
        assert!((b2 - 0.1824).abs() < 1e-4);
        assert!((b1 - 0.05 * b2).abs() < 1e-15);
        for alpha in [0.01, 0.03, 0.05, 0.06] {
            let p = fig1(alpha);
            let (_, b2) = beta_constants(&p).unwrap();
            assert!(b2 > 0.0 && b2 < 1.0);
            assert!((b2 * p.q + p.discriminant()).abs() < 1e-14);
        }
        let p = with_discriminant(fig1(0.05), -1e-8);
        let (_, b2) = beta_constants(&p).unwrap();
        assert!(b2 < 1e-7 && b2 > 0.0);
        assert!(beta_constants(&fig1(0.1)).is_err());
    }

    #[test]
    fn m_star_closed_form_and_quadrature() {
        use crate::special_functions::{integrate_to_infinity, QuadratureSpec};
        for p in [
            fig1(0.10),
            GtscParams::new(1.0, 0.5, 1.0, 1.0, -0.5).unwrap(),
            GtscParams::new(1.0, 0.5, 1.0, 1.0, 0.0).unwrap(),
        ] {
            let nu0 = cramer_root(&p).unwrap();
            let ms = m_star(&p).unwrap();
            let gap = p.alpha - nu0;
            let f = |y: f64| p.c * (-p.rho * y.ln() - gap * y).exp();
            let order = p.rho.max(0.0);
            let quad = p.d_h
                + integrate_to_infinity(f, 0.0, order, 2.0, &QuadratureSpec::default()).unwrap();
            assert!(
                ((ms - quad) / ms).abs() < 1e-8,
                "rho={}: {ms} vs {quad}",
                p.rho
            );
            // q = ν₀ d_H + ∫(e^{ν₀h} − 1) Π_H(dh)
            let g = |y: f64| {
                let tilted = p.c * (-(p.rho + 1.0) * y.ln() - gap * y).exp();
                tilted - p.pi_h_density(y)
            };
            let integral =
                integrate_to_infinity(g, 0.0, order, 2.0, &QuadratureSpec::default()).unwrap();
            assert!((nu0 * p.d_h + integral - p.q).abs() < 1e-8);
        }
        assert!(m_star(&fig1(0.03)).is_err());
    }

    #[test]
    fn report_fields_match_regime() {
        for alpha in [0.01, 0.02, 0.05, 0.07, 0.08, 0.2, 0.9] {
            let r = classify(&fig1(alpha), DEFAULT_BOUNDARY_TOL).unwrap();
            match r.regime {
                Regime::Cramer => {
                    assert!(r.f_alpha > 0.0);
                    let nu0 = r.nu0.unwrap();
                    assert!(nu0 > 0.0 && nu0 < alpha && r.m_star.unwrap() > 0.0);
                    assert!(r.beta1.is_none() && r.beta2.is_none());
                }
                Regime::ConvolutionEquivalent => {
                    assert!(r.f_alpha < 0.0);
                    assert!(r.beta1.unwrap() > 0.0);
                    assert!(r.nu0.is_none());
                }
                Regime::Boundary => unreachable!(),
            }
        }
    }

    #[test]
    fn boundary_alpha_at_reference_parameters() {
        let a0 = boundary_alpha(&fig1(0.1)).unwrap();
        assert!((a0 - 0.07384).abs() < 1e-4, "{a0}");
        assert!(fig1(a0).discriminant().abs() < 1e-14);
        assert!(boundary_alpha(&GtscParams::new(1.0, 0.5, 1.0, 0.1, -0.5).unwrap()).is_err());
        // d_H = 0 still has a root since −Γ(−ρ) > 0
        let p = GtscParams::new(3.0, 0.0, 0.5, 1.0, 0.3).unwrap();
        let a = boundary_alpha(&p).unwrap();
        assert!(GtscParams { alpha: a, ..p }.discriminant().abs() < 1e-12);
    }
}

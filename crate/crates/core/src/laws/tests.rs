use super::gtsc::truncated_stable_integral;
use super::*;
use crate::model::{classify, GtscParams, Regime, DEFAULT_BOUNDARY_TOL};
use crate::special_functions::{gamma, integrate_singular, integrate_to_infinity, QuadratureSpec};

fn fig1(alpha: f64) -> GtscParams {
    GtscParams::new(1.0, 0.5, 1.0, alpha, 0.5).unwrap()
}

fn ladder(p: &GtscParams) -> LadderModel {
    gtsc_ladder(p, &classify(p, DEFAULT_BOUNDARY_TOL).unwrap()).unwrap()
}

fn laws(p: &GtscParams) -> GtscLaws {
    *ladder(p).closed_form().unwrap()
}

fn tight() -> QuadratureSpec {
    QuadratureSpec::new(1e-14, 1e-12, 200).unwrap()
}

/// q shifted so that f(α) equals `target`.
fn with_discriminant(base: GtscParams, target: f64) -> GtscParams {
    let g = gamma(-base.rho).unwrap();
    let q = base.d_h * base.alpha - base.c * base.alpha.powf(base.rho) * g - target;
    GtscParams { q, ..base }
}

#[test]
fn truncated_stable_integral_matches_quadrature() {
    for rho in [-0.7, -0.2, 0.0, 0.05, 0.5, 0.93] {
        for z in [1e-8, 0.3, 1.9, 2.0, 2.1, 7.0, 60.0, 1e4] {
            let closed = truncated_stable_integral(rho, z).unwrap();
            let f = |y: f64| -(-y).exp_m1() * y.powf(-rho - 1.0);
            let spec = QuadratureSpec::new(1e-300, 1e-13, 200).unwrap();
            let quad = integrate_singular(f, 0.0, z, rho.max(0.0), &spec).unwrap();
            assert!(
                ((closed - quad) / quad).abs() < 1e-12,
                "rho={rho} z={z}: {closed} vs {quad}"
            );
        }
    }
}

/// Row I/II/III of the GTSC table by direct quadrature of the defining integrals.
fn table_by_quadrature(p: &GtscParams, laws: &GtscLaws, kind: LawKind, x: f64) -> f64 {
    let GtscParams {
        q,
        c,
        alpha,
        rho,
        d_h,
    } = *p;
    let k = laws.exponent();
    let spec = tight();
    let cramer = laws.regime() == Regime::Cramer;
    match kind {
        LawKind::Overshoot => {
            // y = x + w
            let f = |w: f64| {
                let y = x + w;
                let bracket = if cramer {
                    (-alpha * x - (alpha - k) * w).exp() - (-alpha * y).exp()
                } else {
                    (-alpha * x).exp() * -(-alpha * w).exp_m1()
                };
                y.powf(-rho - 1.0) * bracket
            };
            let order = if x == 0.0 { rho } else { 0.0 };
            let tail = if cramer { 2.0 } else { rho + 1.0 };
            let integral = integrate_to_infinity(f, 0.0, order, tail, &spec).unwrap();
            1.0 - laws.beta2() * (-alpha * x).exp() - c / q * integral
        }
        LawKind::Undershoot => {
            let f = |y: f64| {
                let bracket = if cramer {
                    (-alpha * y).exp() * (k * y).exp_m1()
                } else {
                    -(-alpha * y).exp_m1()
                };
                y.powf(-rho - 1.0) * bracket
            };
            k * d_h / q + c / q * integrate_singular(f, 0.0, x, rho, &spec).unwrap()
        }
        LawKind::MaxUndershoot => {
            let f = |w: f64| {
                let y = x + w;
                y.powf(-rho - 1.0) * (-(alpha - k) * y).exp() * -(-k * w).exp_m1()
            };
            let order = if x == 0.0 { rho } else { 0.0 };
            let tail = if cramer { 2.0 } else { rho + 1.0 };
            let integral = integrate_to_infinity(f, 0.0, order, tail, &spec).unwrap();
            1.0 - laws.beta2() - c / q * integral
        }
    }
}

#[test]
fn closed_forms_match_defining_integrals() {
    for alpha in [0.03, 0.05, 0.08, 0.10, 1.0] {
        let p = fig1(alpha);
        let l = laws(&p);
        for kind in LawKind::ALL {
            for x in [0.0, 1e-6, 0.01, 0.5, 1.0, 3.0, 10.0, 40.0, 200.0] {
                let closed = l.cdf(kind, x).unwrap();
                let quad = table_by_quadrature(&p, &l, kind, x);
                assert!(
                    (closed - quad).abs() < 1e-9,
                    "alpha={alpha} {kind} x={x}: {closed} vs {quad}"
                );
            }
        }
    }
}

#[test]
fn generic_matches_closed_form() {
    for alpha in [0.03, 0.05, 0.10, 0.5] {
        let m = ladder(&fig1(alpha));
        let l = *m.closed_form().unwrap();
        for kind in LawKind::ALL {
            for i in 0..50 {
                let x = 0.4 * i as f64 + if i % 3 == 0 { 0.0 } else { 0.013 };
                let generic = m.generic_cdf(kind, x).unwrap();
                let closed = l.cdf(kind, x).unwrap();
                assert!(
                    (generic - closed).abs() < 1e-8,
                    "alpha={alpha} {kind} x={x}"
                );
            }
        }
    }
}

#[test]
fn generic_matches_closed_form_far_out() {
    let m = ladder(&fig1(0.10));
    let l = *m.closed_form().unwrap();
    for kind in LawKind::ALL {
        for x in [300.0, 2000.0, 9000.0] {
            let generic = m.generic_cdf(kind, x).unwrap();
            let closed = l.cdf(kind, x).unwrap();
            assert!(
                (generic - closed).abs() < 1e-8,
                "{kind} x={x}: {generic} vs {closed}"
            );
        }
    }
}

#[test]
fn cdfs_are_monotone_and_bounded() {
    for alpha in [0.01, 0.03, 0.06, 0.08, 0.10, 2.0] {
        let m = ladder(&fig1(alpha));
        for kind in LawKind::ALL {
            let mut prev = -1.0;
            for i in 0..=400 {
                let x = 0.05 * i as f64 * (1.0 + i as f64 / 20.0);
                let v = m.cdf(kind, x).unwrap();
                assert!((0.0..=1.0).contains(&v), "alpha={alpha} {kind} x={x} v={v}");
                assert!(
                    v >= prev - 1e-14,
                    "alpha={alpha} {kind} x={x}: {v} < {prev}"
                );
                prev = v;
            }
        }
    }
}

#[test]
fn creep_consistency_and_row_four() {
    for alpha in [0.02, 0.05, 0.09, 0.10, 0.7] {
        let m = ladder(&fig1(alpha));
        let l = m.closed_form().unwrap();
        let creep = m.creep_probability();
        assert!((l.creep_probability_from_tails() - creep).abs() < 1e-10);
        for kind in LawKind::ALL {
            assert!((m.cdf(kind, 0.0).unwrap() - creep).abs() < 1e-10);
            assert!((m.generic_cdf(kind, 0.0).unwrap() - creep).abs() < 1e-10);
        }
    }
    // zero ladder drift: no atom at 0
    let p = GtscParams::new(1.0, 0.0, 1.0, 0.05, 0.5).unwrap();
    let m = ladder(&p);
    assert_eq!(m.regime(), Regime::ConvolutionEquivalent);
    assert_eq!(m.cdf(LawKind::MaxUndershoot, 0.0).unwrap(), 0.0);
}

#[test]
fn overshoot_integrates_root_identity() {
    // 1 − F(0) = (1/q)∫(e^{ν₀y} − 1)Π_H(dy) = 1 − ν₀d_H/q
    let p = fig1(0.10);
    let l = laws(&p);
    let nu0 = l.exponent();
    let gap = p.alpha - nu0;
    let f = |y: f64| p.c * y.powf(-p.rho - 1.0) * ((-gap * y).exp() - (-p.alpha * y).exp());
    let integral = integrate_to_infinity(f, 0.0, p.rho, 2.0, &tight()).unwrap();
    assert!((integral / p.q - (1.0 - nu0 * p.d_h / p.q)).abs() < 1e-9);
    assert!((l.defect(LawKind::Overshoot, 0.0).unwrap() - integral / p.q).abs() < 1e-9);
}

#[test]
fn mass_limits_at_horizon() {
    for alpha in [0.08, 0.10, 0.5] {
        let l = laws(&fig1(alpha));
        for kind in LawKind::ALL {
            let h = l.horizon(kind, 1e-9).unwrap();
            assert!(
                l.cdf(kind, h).unwrap() >= 1.0 - 1e-6,
                "alpha={alpha} {kind} h={h}"
            );
            assert_eq!(l.mass_at_infinity(kind), 0.0);
        }
    }
    for alpha in [0.03, 0.05] {
        let l = laws(&fig1(alpha));
        for kind in [LawKind::Undershoot, LawKind::MaxUndershoot] {
            let h = l.horizon(kind, 1e-9).unwrap();
            let v = l.cdf(kind, h).unwrap();
            assert!(
                (v - (1.0 - l.beta2())).abs() < 1e-6,
                "alpha={alpha} {kind} h={h} v={v}"
            );
            assert_eq!(l.mass_at_infinity(kind), l.beta2());
        }
    }
}

#[test]
fn defect_agrees_with_cdf() {
    for alpha in [0.03, 0.10] {
        let l = laws(&fig1(alpha));
        for kind in LawKind::ALL {
            for x in [0.5, 1.0, 5.0, 12.0, 20.0, 150.0] {
                let d = l.defect(kind, x).unwrap();
                let direct = l.total_mass(kind) - l.cdf(kind, x).unwrap();
                assert!(
                    (d - direct).abs() < 1e-12,
                    "alpha={alpha} {kind} x={x}: {d} vs {direct}"
                );
            }
        }
    }
}

/// defect·e^{αx} (Cramér overshoot, CE overshoot), defect·e^{(α−ν₀)x} (Cramér undershoots)
/// or the plain defect (CE undershoots), by direct quadrature.
fn scaled_defect_by_quadrature(p: &GtscParams, l: &GtscLaws, kind: LawKind, x: f64) -> f64 {
    let GtscParams {
        q, c, alpha, rho, ..
    } = *p;
    let k = l.exponent();
    let gap = alpha - k;
    let spec = tight();
    let cramer = l.regime() == Regime::Cramer;
    let shifted = |w: f64| (x + w).powf(-rho - 1.0);
    match (cramer, kind) {
        (true, LawKind::Overshoot) => {
            let f = |w: f64| shifted(w) * ((-gap * w).exp() - (-alpha * w).exp());
            c / q * (integrate_to_infinity(f, 0.0, 0.0, 2.0, &spec).unwrap())
        }
        (true, LawKind::Undershoot) => {
            let f = |w: f64| shifted(w) * ((-gap * w).exp() - (-k * x - alpha * w).exp());
            c / q * (integrate_to_infinity(f, 0.0, 0.0, 2.0, &spec).unwrap())
        }
        (true, LawKind::MaxUndershoot) => {
            let f = |w: f64| shifted(w) * ((-gap * w).exp() - (-alpha * w).exp());
            c / q * (integrate_to_infinity(f, 0.0, 0.0, 2.0, &spec).unwrap())
        }
        (false, LawKind::Overshoot) => {
            let f = |w: f64| shifted(w) * -(-alpha * w).exp_m1();
            let i = integrate_to_infinity(f, 0.0, 0.0, rho + 1.0, &spec).unwrap();
            l.beta2() + c / q * i
        }
        (false, LawKind::Undershoot) => {
            let f = |w: f64| shifted(w) * (1.0 - (-alpha * (x + w)).exp());
            c / q * (integrate_to_infinity(f, 0.0, 0.0, rho + 1.0, &spec).unwrap())
        }
        (false, LawKind::MaxUndershoot) => {
            let f = |w: f64| shifted(w) * -(-alpha * w).exp_m1();
            c / q * (integrate_to_infinity(f, 0.0, 0.0, rho + 1.0, &spec).unwrap())
        }
    }
}

#[test]
fn tail_ratios_converge_to_one() {
    for alpha in [0.03, 0.05, 0.10] {
        let p = fig1(alpha);
        let l = laws(&p);
        for kind in LawKind::ALL {
            let mut x = 1.0;
            let mut last = f64::NAN;
            let mut located = None;
            for _ in 0..60 {
                let r = l.tail_ratio(kind, x).unwrap();
                if located.is_none() && (r - 1.0).abs() <= 0.05 {
                    located = Some(x);
                }
                last = r;
                x *= 2.0;
            }
            assert!(
                (last - 1.0).abs() < 1e-3,
                "alpha={alpha} {kind}: ratio {last} at x={x}"
            );
            let x5 = located.unwrap();
            // cross-check the scaled ratio against quadrature of the defining integral
            let scaled = scaled_defect_by_quadrature(&p, &l, kind, x5);
            let ratio_quad = match (l.regime(), kind) {
                (Regime::Cramer, LawKind::Overshoot) => {
                    scaled / (p.c / p.q * (1.0 / (alpha - l.exponent()) - 1.0 / alpha))
                        * x5.powf(p.rho + 1.0)
                }
                (Regime::Cramer, LawKind::Undershoot) => {
                    scaled / (p.c / (p.q * (alpha - l.exponent()))) * x5.powf(p.rho + 1.0)
                }
                (Regime::Cramer, _) => {
                    scaled / (p.c / p.q * (1.0 / (alpha - l.exponent()) - 1.0 / alpha))
                        * x5.powf(p.rho + 1.0)
                }
                (_, LawKind::Overshoot) => scaled / l.beta2(),
                _ => scaled / (p.c / (p.rho * p.q)) * x5.powf(p.rho),
            };
            let r = l.tail_ratio(kind, x5).unwrap();
            assert!((0.95..=1.05).contains(&r));
            assert!(
                (r - ratio_quad).abs() < 1e-7,
                "alpha={alpha} {kind} x={x5}: {r} vs {ratio_quad}"
            );
        }
    }
}

#[test]
fn tail_asymptotics_positive() {
    for alpha in [0.03, 0.10] {
        let l = laws(&fig1(alpha));
        for kind in LawKind::ALL {
            for x in [1e-3, 1.0, 100.0] {
                assert!(l.tail_asymptotic(kind, x).unwrap() > 0.0);
            }
            assert!(l.tail_asymptotic(kind, 0.0).is_err());
        }
    }
    let l = laws(&fig1(0.1));
    assert!(overshoot_tail_asymptotic(&l, 2.0).unwrap() > 0.0);
    assert!(undershoot_tail_asymptotic(&l, 2.0).unwrap() > 0.0);
    assert!(max_undershoot_tail_asymptotic(&l, 2.0).unwrap() > 0.0);
}

#[test]
fn boundary_continuity() {
    let base = fig1(0.10);
    let grid: Vec<f64> = (0..=200).map(|i| 0.1 * i as f64).collect();
    let mut previous = f64::INFINITY;
    for delta in [1e-2, 1e-3, 1e-4, 1e-5] {
        let cr = ladder(&with_discriminant(base, delta));
        let ce = ladder(&with_discriminant(base, -delta));
        assert_eq!(cr.regime(), Regime::Cramer);
        assert_eq!(ce.regime(), Regime::ConvolutionEquivalent);
        let mut sup: f64 = 0.0;
        for kind in LawKind::ALL {
            for &x in &grid {
                sup = sup.max((cr.cdf(kind, x).unwrap() - ce.cdf(kind, x).unwrap()).abs());
            }
        }
        if delta == 1e-4 {
            assert!(sup < 1e-3, "sup distance {sup}");
        }
        assert!(sup < previous);
        previous = sup;
    }
}

#[test]
fn ruin_asymptotic_forms() {
    let p = fig1(0.10);
    let r = classify(&p, DEFAULT_BOUNDARY_TOL).unwrap();
    let nu0 = r.nu0.unwrap();
    for u in [10.0, 50.0] {
        let a = ruin_probability_asymptotic(&p, &r, u).unwrap();
        let b = ruin_probability_ladder_form(&p, &r, u).unwrap();
        assert!(((a - b) / b).abs() < 1e-10);
        let shifted = ruin_probability_asymptotic(&p, &r, u + 3.0).unwrap();
        assert!((shifted / a - (-3.0 * nu0).exp()).abs() < 1e-14);
    }
    assert!(ruin_probability_ladder_tail_form(&p, &r, 10.0).is_err());

    let p = fig1(0.05);
    let r = classify(&p, DEFAULT_BOUNDARY_TOL).unwrap();
    for u in [10.0, 50.0] {
        let a = ruin_probability_asymptotic(&p, &r, u).unwrap();
        let b = ruin_probability_ladder_form(&p, &r, u).unwrap();
        assert!(((a - b) / b).abs() < 1e-10);
    }
    let at50 = ruin_probability_asymptotic(&p, &r, 50.0).unwrap();
    assert!((at50 - 0.1397).abs() < 5e-4, "{at50}");
    // the ladder-tail form is only asymptotically equivalent
    let ratio = |u: f64| {
        ruin_probability_ladder_tail_form(&p, &r, u).unwrap()
            / ruin_probability_asymptotic(&p, &r, u).unwrap()
    };
    assert!((ratio(1e4) - 1.0).abs() < 5e-3);
    assert!((ratio(1e4) - 1.0).abs() < (ratio(1e3) - 1.0).abs());

    let b = with_discriminant(fig1(0.1), 0.0);
    let rb = classify(&b, DEFAULT_BOUNDARY_TOL).unwrap();
    assert!(matches!(
        ruin_probability_asymptotic(&b, &rb, 1.0),
        Err(crate::Error::State(_))
    ));
    assert!(ruin_probability_asymptotic(&p, &r, 0.0).is_err());
}

#[test]
fn ruin_asymptotic_negative_rho() {
    for rho in [-0.5, 0.0] {
        let p = GtscParams::new(1.0, 0.5, 1.0, 1.0, rho).unwrap();
        let r = classify(&p, DEFAULT_BOUNDARY_TOL).unwrap();
        let a = ruin_probability_asymptotic(&p, &r, 10.0).unwrap();
        let b = ruin_probability_ladder_form(&p, &r, 10.0).unwrap();
        assert!(((a - b) / b).abs() < 1e-12);
    }
}

#[test]
fn g_kernel_properties() {
    let p = GtscParams::new(1.0, 0.5, 1.0, 1.0, 0.5).unwrap();
    let m = ladder(&p);
    assert_eq!(m.g_kernel(2.0, 2.0), 0.0);
    for (x, y) in [(1.0, 0.2), (3.0, 0.5), (10.0, 7.0)] {
        let f = |z: f64| p.pi_x_tail(z + y).unwrap();
        let quad = integrate_singular(f, 0.0, x - y, 0.0, &tight()).unwrap();
        assert!(((m.g_kernel(x, y) - quad) / quad).abs() < 1e-10);
        assert!(m.g_kernel(x, y) <= m.pi_h_tail(y));
        assert!(m.g_kernel(x + 1.0, y) >= m.g_kernel(x, y));
        assert!(m.g_kernel(x, y + 0.1) <= m.g_kernel(x, y));
    }
    let gap = 1.0 - m.g_kernel(50.0, 0.5) / m.pi_h_tail(0.5);
    assert!(gap < 1e-6);
}

#[test]
fn negative_rho_uses_generic_evaluators() {
    for rho in [-0.5, 0.0] {
        let p = GtscParams::new(1.0, 0.5, 1.0, 1.0, rho).unwrap();
        let m = ladder(&p);
        assert!(m.closed_form().is_none());
        let creep = m.creep_probability();
        let mut prev = [0.0; 3];
        for i in 0..=30 {
            let x = 0.5 * i as f64;
            for (j, kind) in LawKind::ALL.into_iter().enumerate() {
                let v = m.cdf(kind, x).unwrap();
                if i == 0 {
                    assert!((v - creep).abs() < 1e-9, "rho={rho} {kind}: {v} vs {creep}");
                }
                assert!(v >= prev[j] - 1e-12 && v <= 1.0 + 1e-12);
                prev[j] = v;
            }
        }
        for kind in LawKind::ALL {
            assert!(m.cdf(kind, 60.0).unwrap() > 1.0 - 1e-8, "rho={rho} {kind}");
        }
    }
}

#[test]
fn tabulate_curves() {
    let m = ladder(&fig1(0.10));
    let c = tabulate(&m, LawKind::Overshoot, &[0.0, 1.0, 5.0]).unwrap();
    assert_eq!(c.mass_at_infinity, 0.0);
    assert!((c.values[0] - m.creep_probability()).abs() < 1e-10);
    assert_eq!(c.atom_at_zero, m.creep_probability());
    let m = ladder(&fig1(0.05));
    let c = tabulate(&m, LawKind::Undershoot, &[0.0, 2.0]).unwrap();
    assert_eq!(c.mass_at_infinity, m.beta2());
    let c = tabulate(&m, LawKind::Overshoot, &[0.0]).unwrap();
    assert_eq!(c.values.len(), 1);
    assert!((c.values[0] - m.creep_probability()).abs() < 1e-10);
    assert!(tabulate(&m, LawKind::Overshoot, &[1.0, 0.5]).is_err());
    assert!(tabulate(&m, LawKind::Overshoot, &[-1.0]).is_err());
    assert!(tabulate(&m, LawKind::Overshoot, &[]).is_err());
}

#[test]
fn ladder_model_validation() {
    use std::sync::Arc;
    let tail: TailFn = Arc::new(|x: f64| (-x).exp());
    let kernel: KernelFn = Arc::new(|x: f64, y: f64| (-y).exp() - (-x).exp());
    let ok = LadderModel::new(
        1.0,
        0.2,
        0.5,
        Regime::Cramer,
        0.0,
        tail.clone(),
        kernel.clone(),
    );
    assert!(ok.is_ok());
    assert!(LadderModel::new(
        1.0,
        0.2,
        0.5,
        Regime::Cramer,
        0.1,
        tail.clone(),
        kernel.clone()
    )
    .is_err());
    assert!(LadderModel::new(
        1.0,
        0.2,
        0.5,
        Regime::Boundary,
        0.0,
        tail.clone(),
        kernel.clone()
    )
    .is_err());
    assert!(LadderModel::new(
        1.0,
        0.2,
        0.5,
        Regime::ConvolutionEquivalent,
        1.0,
        tail.clone(),
        kernel.clone()
    )
    .is_err());
    assert!(LadderModel::new(0.0, 0.2, 0.5, Regime::Cramer, 0.0, tail, kernel).is_err());
    let b = with_discriminant(fig1(0.1), 0.0);
    let rb = classify(&b, DEFAULT_BOUNDARY_TOL).unwrap();
    assert!(matches!(gtsc_ladder(&b, &rb), Err(crate::Error::State(_))));
}

#[test]
fn user_supplied_ladder() {
    use std::sync::Arc;
    // Π̄_H(x) = λ e^{−μx} with q = λ + κ-independent constant; only structural checks
    let (lambda, mu) = (0.5, 2.0);
    let tail: TailFn = Arc::new(move |x: f64| lambda * (-mu * x).exp());
    let kernel: KernelFn =
        Arc::new(move |x: f64, y: f64| lambda * ((-mu * y).exp() - (-mu * x).exp()));
    let m = LadderModel::new(1.0, 0.3, 0.4, Regime::Cramer, 0.0, tail, kernel).unwrap();
    // max-undershoot: κd/q + (κ/q)∫₀^x λe^{(κ−μ)y}dy
    let x = 2.0;
    let expected = 0.4 * 0.3 + 0.4 * lambda * ((0.4 - mu) * x).exp_m1() / (0.4 - mu);
    assert!((max_undershoot_cdf(&m, x).unwrap() - expected).abs() < 1e-12);
    let over = overshoot_cdf(&m, x).unwrap();
    let expected = 1.0 - 0.4 * lambda * (-mu * x).exp() / (mu - 0.4);
    assert!((over - expected).abs() < 1e-12);
    assert!(undershoot_cdf(&m, x).unwrap() <= max_undershoot_cdf(&m, x).unwrap() + 1e-15);
}

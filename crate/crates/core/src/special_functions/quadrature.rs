//! Adaptive Gauss–Kronrod quadrature with algebraic endpoint substitutions.
//!
//! A lower-endpoint singularity `y^{-σ}` is removed by `y = a + (b − a) t^p` with
//! `p = 1/(1 − σ)`. Infinite ranges are split at `a + 1` and the tail is mapped by
//! `y = m + (s^{-k} − 1)`, where `k` is chosen from the integrand's algebraic decay
//! index so that a `y^{-β}` tail becomes bounded in `s`.

use crate::error::{Error, Result};

/// Accuracy targets for [`integrate_singular`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of interval bisections.
    pub max_refinements: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_refinements: 60,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_refinements: usize) -> Result<Self> {
        let spec = Self {
            abs_tol,
            rel_tol,
            max_refinements,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) || self.max_refinements < 1 {
            return Err(Error::invalid(format!(
                "quadrature spec requires abs_tol > 0, rel_tol > 0, max_refinements >= 1 (got {self:?})"
            )));
        }
        Ok(())
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    if !res_k.is_finite() {
        return Err(Error::domain(format!(
            "integrand is not finite on [{a}, {b}]"
        )));
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment {
        a,
        b,
        value,
        error: err,
    })
}

/// Globally adaptive bisection over the given initial breakpoints.
fn adaptive<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], spec: &QuadratureSpec) -> Result<f64> {
    let mut segments = Vec::with_capacity(spec.max_refinements + breaks.len());
    for w in breaks.windows(2) {
        segments.push(gauss_kronrod_15(f, w[0], w[1])?);
    }
    let mut refinements = 0;
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= spec.abs_tol.max(spec.rel_tol * value.abs()) {
            return Ok(value);
        }
        let (idx, worst) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, s)| (i, *s))
            .expect("at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        let too_narrow = mid <= worst.a || mid >= worst.b;
        if refinements >= spec.max_refinements || too_narrow {
            return Err(Error::Accuracy {
                estimate: value,
                error_bound: error,
            });
        }
        segments[idx] = gauss_kronrod_15(f, worst.a, mid)?;
        segments.push(gauss_kronrod_15(f, mid, worst.b)?);
        refinements += 1;
    }
}

fn substitution_power(singularity_order: f64) -> f64 {
    if singularity_order > 0.0 {
        1.0 / (1.0 - singularity_order)
    } else {
        1.0
    }
}

fn check_order(singularity_order: f64) -> Result<()> {
    if !(singularity_order < 1.0) {
        return Err(Error::domain(format!(
            "singularity order {singularity_order} is not integrable (must be < 1)"
        )));
    }
    Ok(())
}

/// ∫ₐᵇ f(y) dy for an integrand behaving like `(y − a)^{-singularity_order}` near `a`.
///
/// `b` may be `f64::INFINITY`; the tail is then assumed to decay at least like `y^{-1.5}`
/// (exponentially decaying integrands qualify). Use [`integrate_to_infinity`] to declare
/// a slower algebraic decay.
pub fn integrate_singular<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    singularity_order: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if b == f64::INFINITY {
        return integrate_to_infinity(f, a, singularity_order, 1.5, spec);
    }
    spec.validate()?;
    check_order(singularity_order)?;
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::domain(format!(
            "invalid integration range [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let p = substitution_power(singularity_order);
    let width = b - a;
    let g = |t: f64| {
        let y = a + width * t.powf(p);
        width * p * t.powf(p - 1.0) * f(y)
    };
    adaptive(&g, &[0.0, 1.0], spec)
}

/// ∫ₐ^∞ f(y) dy where `f ~ (y − a)^{-singularity_order}` near `a` and `|f| ≲ y^{-tail_index}`
/// as `y → ∞` (`tail_index > 1`).
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    singularity_order: f64,
    tail_index: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    check_order(singularity_order)?;
    if !a.is_finite() {
        return Err(Error::domain(format!(
            "lower limit must be finite, got {a}"
        )));
    }
    if !(tail_index > 1.0) {
        return Err(Error::domain(format!(
            "tail index {tail_index} is not integrable (must be > 1)"
        )));
    }
    let p = substitution_power(singularity_order);
    let k = (1.0 / (tail_index - 1.0)).clamp(1.0, 50.0);
    let m = a + 1.0;
    let g = |t: f64| {
        if t <= 1.0 {
            let y = a + t.powf(p);
            p * t.powf(p - 1.0) * f(y)
        } else {
            let s = 2.0 - t;
            let y = m + (s.powf(-k) - 1.0);
            if !y.is_finite() {
                return 0.0;
            }
            let fy = f(y);
            if fy == 0.0 {
                0.0
            } else {
                fy * k * s.powf(-k - 1.0)
            }
        }
    };
    adaptive(&g, &[0.0, 1.0, 2.0], spec)
}

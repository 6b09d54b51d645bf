//! Gamma function and the incomplete gamma family, including negative shapes.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_MAX_TERMS: usize = 500;
const CF_MAX_TERMS: usize = 2_000;
const TINY: f64 = 1e-300;

/// Below this argument a negative shape uses `Γ(s) − γ(s, x)` with the lower series.
const NEG_SHAPE_SERIES_THRESHOLD: f64 = 0.3;
/// At or above this argument the continued fraction is used for non-positive shapes.
const NEG_SHAPE_CF_THRESHOLD: f64 = 1.5;

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Γ(x) for real `x` away from the poles at 0, −1, −2, ...
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("gamma: NaN argument"));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::domain(format!("gamma: pole at {x}")));
    }
    Ok(gamma_unchecked(x))
}

pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if (1.0..=171.0).contains(&x) && x == x.floor() {
        return (2..x as u32).fold(1.0, |acc, k| acc * k as f64);
    }
    if x < 0.5 {
        // reflection
        PI / ((PI * x).sin() * gamma_unchecked(1.0 - x))
    } else if x > 171.7 {
        f64::INFINITY
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEFFS[0];
        let t = x + LANCZOS_G + 0.5;
        for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// ln|Γ(x)|.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || is_nonpositive_integer(x) {
        return Err(Error::domain(format!("ln_gamma: pole or NaN at {x}")));
    }
    if x < 0.5 {
        let s = (PI * x).sin().abs();
        return Ok(PI.ln() - s.ln() - ln_gamma(1.0 - x)?);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    Ok(0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln())
}

/// Lower incomplete gamma γ(s, x) = ∫₀ˣ t^{s−1} e^{−t} dt for s > 0, x ≥ 0.
pub fn lower_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::domain(format!(
            "lower_incomplete_gamma: shape must be positive, got {s}"
        )));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!(
            "lower_incomplete_gamma: argument must be nonnegative, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < s + 1.0 {
        lower_series(s, x)
    } else {
        Ok(gamma_unchecked(s) - upper_cf_scaled(s, x)? * (-x).exp())
    }
}

/// Upper incomplete gamma Γ(s, x) = ∫ₓ^∞ t^{s−1} e^{−t} dt for any real `s` and x > 0.
pub fn upper_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    check_upper_args(s, x)?;
    if use_continued_fraction(s, x) {
        return Ok(upper_cf_scaled(s, x)? * (-x).exp());
    }
    upper_by_series_or_recurrence(s, x)
}

/// eˣ·Γ(s, x); stays finite where Γ(s, x) itself underflows.
pub fn upper_incomplete_gamma_scaled(s: f64, x: f64) -> Result<f64> {
    check_upper_args(s, x)?;
    if use_continued_fraction(s, x) {
        return upper_cf_scaled(s, x);
    }
    Ok(upper_by_series_or_recurrence(s, x)? * x.exp())
}

fn check_upper_args(s: f64, x: f64) -> Result<()> {
    if s.is_nan() {
        return Err(Error::domain("upper_incomplete_gamma: NaN shape"));
    }
    if !(x > 0.0) {
        return Err(Error::domain(format!(
            "upper_incomplete_gamma: argument must be positive, got {x}"
        )));
    }
    Ok(())
}

fn use_continued_fraction(s: f64, x: f64) -> bool {
    if s > 0.0 {
        x >= s + 1.0
    } else {
        x >= NEG_SHAPE_CF_THRESHOLD
    }
}

fn upper_by_series_or_recurrence(s: f64, x: f64) -> Result<f64> {
    if s > 0.0 {
        return Ok(gamma_unchecked(s) - lower_series(s, x)?);
    }
    if x < NEG_SHAPE_SERIES_THRESHOLD && !is_nonpositive_integer(s) {
        return Ok(gamma_unchecked(s) - lower_series(s, x)?);
    }
    // Γ(k, x) = (Γ(k+1, x) − x^k e^{−x}) / k, stepping down from the base shape.
    let steps = (-s).ceil();
    let base = s + steps;
    let mut value = if base == 0.0 {
        exp_integral_e1(x)?
    } else {
        gamma_unchecked(base) - lower_series(base, x)?
    };
    let ln_x = x.ln();
    let mut k = base - 1.0;
    for _ in 0..steps as usize {
        value = (value - (k * ln_x - x).exp()) / k;
        k -= 1.0;
    }
    Ok(value)
}

/// Series x^s e^{−x} Σ xⁿ / (s(s+1)…(s+n)); valid for s not a non-positive integer.
fn lower_series(s: f64, x: f64) -> Result<f64> {
    let mut term = 1.0 / s;
    let mut sum = term;
    let mut denom = s;
    for _ in 0..SERIES_MAX_TERMS {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() <= sum.abs() * f64::EPSILON {
            return Ok(sum * (s * x.ln() - x).exp());
        }
    }
    Err(Error::Accuracy {
        estimate: sum * (s * x.ln() - x).exp(),
        error_bound: term.abs(),
    })
}

/// Modified Lentz evaluation of the Legendre continued fraction; returns eˣ Γ(s, x).
fn upper_cf_scaled(s: f64, x: f64) -> Result<f64> {
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=CF_MAX_TERMS {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= f64::EPSILON {
            return Ok(h * (s * x.ln()).exp());
        }
    }
    Err(Error::Accuracy {
        estimate: h * (s * x.ln()).exp(),
        error_bound: f64::NAN,
    })
}

/// E₁(x) = Γ(0, x).
fn exp_integral_e1(x: f64) -> Result<f64> {
    if x >= 1.0 {
        return Ok(upper_cf_scaled(0.0, x)? * (-x).exp());
    }
    let mut sum = 0.0;
    let mut term = 1.0;
    for n in 1..SERIES_MAX_TERMS {
        let n = n as f64;
        term *= -x / n;
        let contrib = term / n;
        sum += contrib;
        if contrib.abs() <= f64::EPSILON * sum.abs() {
            return Ok(-EULER_GAMMA - x.ln() - sum);
        }
    }
    Err(Error::Accuracy {
        estimate: -EULER_GAMMA - x.ln() - sum,
        error_bound: term.abs(),
    })
}

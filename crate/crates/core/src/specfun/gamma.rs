//! Gamma function, its logarithm, Pochhammer symbols and generalized binomials.
//!
//! Γ uses the Lanczos approximation with g = 7 and nine coefficients for
//! x ≥ 1/2 and the reflection formula below that. Positive integers up to 170
//! come from an exact factorial table so that Γ(n+1) = n! bit for bit.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Largest integer n with n! representable as a finite f64.
const MAX_FACTORIAL: usize = 170;

fn factorial_table() -> &'static [f64; MAX_FACTORIAL + 1] {
    static TABLE: OnceLock<[f64; MAX_FACTORIAL + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; MAX_FACTORIAL + 1];
        for n in 1..=MAX_FACTORIAL {
            t[n] = t[n - 1] * n as f64;
        }
        t
    })
}

/// n! as f64; `inf` beyond 170.
pub fn factorial(n: u64) -> f64 {
    if n as usize > MAX_FACTORIAL {
        f64::INFINITY
    } else {
        factorial_table()[n as usize]
    }
}

/// True when `x` is 0, −1, −2, …
pub fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

fn as_small_positive_integer(x: f64) -> Option<usize> {
    if x >= 1.0 && x == x.round() && x <= (MAX_FACTORIAL + 1) as f64 {
        Some(x as usize)
    } else {
        None
    }
}

/// sin(πx) with the argument reduced modulo 2 first.
fn sin_pi(x: f64) -> f64 {
    let y = x.rem_euclid(2.0);
    if y <= 0.5 {
        (PI * y).sin()
    } else if y <= 1.5 {
        (PI * (1.0 - y)).sin()
    } else {
        (PI * (y - 2.0)).sin()
    }
}

/// Lanczos sum and shifted argument for x ≥ 1/2.
fn lanczos_parts(x: f64) -> (f64, f64, f64) {
    let xm1 = x - 1.0;
    let mut sum = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        sum += c / (xm1 + i as f64);
    }
    let w = xm1 + LANCZOS_G + 0.5;
    (xm1, w, sum)
}

/// Γ(x). Poles at non-positive integers are reported as [`Error::Pole`].
/// Returns `inf` once Γ(x) exceeds the f64 range; use [`ln_gamma`] there.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("gamma of NaN".into()));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    if let Some(n) = as_small_positive_integer(x) {
        return Ok(factorial_table()[n - 1]);
    }
    if x < 0.5 {
        let s = sin_pi(x);
        let g = gamma(1.0 - x)?;
        return Ok(PI / (s * g));
    }
    if x > 171.7 {
        return Ok(f64::INFINITY);
    }
    let (xm1, w, sum) = lanczos_parts(x);
    // Split the power so w^(x-1/2) does not overflow before e^(-w) is applied.
    let half = w.powf(0.5 * (xm1 + 0.5));
    Ok((2.0 * PI).sqrt() * half * (half * (-w).exp()) * sum)
}

/// ln|Γ(x)| together with the sign of Γ(x).
pub fn ln_gamma(x: f64) -> Result<(f64, f64)> {
    if x.is_nan() {
        return Err(Error::Domain("ln_gamma of NaN".into()));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    if let Some(n) = as_small_positive_integer(x) {
        return Ok((factorial_table()[n - 1].ln(), 1.0));
    }
    if x < 0.5 {
        let s = sin_pi(x);
        let (lg, sg) = ln_gamma(1.0 - x)?;
        return Ok((PI.ln() - s.abs().ln() - lg, s.signum() * sg));
    }
    let (xm1, w, sum) = lanczos_parts(x);
    Ok((LN_SQRT_2PI + (xm1 + 0.5) * w.ln() - w + sum.ln(), 1.0))
}

/// Rising factorial (z)_n = z(z+1)…(z+n−1) by direct product.
pub fn pochhammer(z: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (z + f64::from(i)))
}

/// Generalized binomial coefficient C(x, j) = x(x−1)…(x−j+1)/j! for real x.
pub fn binomial(x: f64, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (x - f64::from(i)) / f64::from(i + 1))
}

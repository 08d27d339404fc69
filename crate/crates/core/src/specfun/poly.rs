//! Associated Laguerre and Gegenbauer polynomials with real order, evaluated by
//! their three-term recurrences in the degree.

use serde::{Deserialize, Serialize};

/// Degree and (real) order of a classical orthogonal polynomial: the Laguerre
/// superscript α or the Gegenbauer order λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyParams {
    pub degree: u32,
    pub order: f64,
}

impl PolyParams {
    pub fn new(degree: u32, order: f64) -> Self {
        Self { degree, order }
    }
}

/// L_n^{(α)}(x).
pub fn laguerre(params: PolyParams, x: f64) -> f64 {
    let alpha = params.order;
    let mut prev = 1.0;
    if params.degree == 0 {
        return prev;
    }
    let mut cur = -x + alpha + 1.0;
    for n in 2..=params.degree {
        let n = f64::from(n);
        let next = ((2.0 * n - 1.0 + alpha - x) * cur - (n - 1.0 + alpha) * prev) / n;
        prev = cur;
        cur = next;
    }
    cur
}

/// C_n^{(λ)}(x).
pub fn gegenbauer(params: PolyParams, x: f64) -> f64 {
    let lambda = params.order;
    let mut prev = 1.0;
    if params.degree == 0 {
        return prev;
    }
    let mut cur = 2.0 * lambda * x;
    for n in 2..=params.degree {
        let n = f64::from(n);
        let next = (2.0 * x * (n + lambda - 1.0) * cur - (n + 2.0 * lambda - 2.0) * prev) / n;
        prev = cur;
        cur = next;
    }
    cur
}

/// Which coefficient pattern of the mixed-order Gegenbauer identity
/// `2α(1−x²)C_{n−1}^{(α+1)}(x) = c·C_{n−1}^{(α)}(x) − n x C_n^{(α)}(x)` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixedOrderForm {
    /// c = 2α + n + 1.
    AsPrinted,
    /// c = 2α + n − 1, the reference-table form.
    Standard,
}

/// Left minus right side of the mixed-order identity at (α, n, x), n ≥ 1.
pub fn gegenbauer_mixed_order_residual(alpha: f64, n: u32, x: f64, form: MixedOrderForm) -> f64 {
    assert!(n >= 1, "identity is stated for n >= 1");
    let nf = f64::from(n);
    let lhs = 2.0 * alpha * (1.0 - x * x) * gegenbauer(PolyParams::new(n - 1, alpha + 1.0), x);
    let c = match form {
        MixedOrderForm::AsPrinted => 2.0 * alpha + nf + 1.0,
        MixedOrderForm::Standard => 2.0 * alpha + nf - 1.0,
    };
    let rhs = c * gegenbauer(PolyParams::new(n - 1, alpha), x)
        - nf * x * gegenbauer(PolyParams::new(n, alpha), x);
    lhs - rhs
}

/// Largest |residual| of the mixed-order identity over a uniform x grid on
/// [−1, 1] for degrees 1..=max_degree.
pub fn mixed_order_worst_residual(alpha: f64, max_degree: u32, form: MixedOrderForm) -> f64 {
    let mut worst: f64 = 0.0;
    for n in 1..=max_degree {
        for i in 0..=40 {
            let x = -1.0 + f64::from(i) / 20.0;
            worst = worst.max(gegenbauer_mixed_order_residual(alpha, n, x, form).abs());
        }
    }
    worst
}

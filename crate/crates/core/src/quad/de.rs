//! Double-exponential rules: tanh-sinh on (−1, 1) and exp-sinh on (0, ∞).
//!
//! Both share one table of step-halving levels in the transformed variable u.
//! Level 0 holds u = −U..U with h = 1; level L ≥ 1 holds the odd multiples of
//! 2^−L, so the union of levels 0..=L is the uniform grid of step 2^−L.

use std::f64::consts::{FRAC_PI_2, LN_2};
use std::sync::OnceLock;

use super::{IntegralResult, QuadratureSpec};
use crate::specfun::NeumaierSum;

const U_MAX: f64 = 8.0;
const MAX_LEVEL: u32 = 12;
/// exp() of anything below this is zero in f64.
const LOG_UNDERFLOW: f64 = -745.0;
/// Scaled radius beyond which an exponentially decaying integrand is zero.
const RADIAL_T_MAX: f64 = 1e4;
const MIN_LEVELS: u32 = 3;

#[derive(Debug, Clone, Copy)]
struct Node {
    /// (π/2)·sinh(u)
    v: f64,
    /// ln((π/2)·cosh(u))
    ln_dv: f64,
}

fn table() -> &'static [Vec<Node>] {
    static TABLE: OnceLock<Vec<Vec<Node>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let node = |u: f64| Node { v: FRAC_PI_2 * u.sinh(), ln_dv: FRAC_PI_2.ln() + u.cosh().ln() };
        let mut levels = Vec::with_capacity(MAX_LEVEL as usize + 1);
        let top = U_MAX as i64;
        levels.push((-top..=top).map(|j| node(j as f64)).collect());
        for level in 1..=MAX_LEVEL {
            let h = (0.5f64).powi(level as i32);
            let count = (U_MAX / h) as i64; // odd numerators in (−count, count)
            levels.push(
                (-count..count)
                    .filter(|j| j.rem_euclid(2) == 1)
                    .map(|j| node(j as f64 * h))
                    .collect(),
            );
        }
        levels
    })
}

/// ln(1 − tanh²v) without underflow for large |v|.
fn ln_one_minus_tanh2(v: f64) -> f64 {
    let a = v.abs();
    2.0 * LN_2 - 2.0 * a - 2.0 * (-2.0 * a).exp().ln_1p()
}

/// Runs the level loop; `term` maps a node to its (already weighted) contribution
/// or `None` when the node is skipped.
fn drive<T>(spec: &QuadratureSpec, scale: f64, term: T) -> IntegralResult
where
    T: Fn(&Node) -> Option<f64>,
{
    let levels = table();
    let max_level = spec.max_levels.min(MAX_LEVEL + 1) - 1;
    let mut acc = NeumaierSum::default();
    let mut nodes_used = 0usize;
    let mut prev: Option<f64> = None;
    let mut last = IntegralResult { value: f64::NAN, error_estimate: f64::INFINITY, nodes_used: 0, converged: false };
    for level in 0..=max_level {
        let nodes = &levels[level as usize];
        if nodes_used + nodes.len() > spec.node_budget {
            break;
        }
        for n in nodes {
            if let Some(t) = term(n) {
                nodes_used += 1;
                acc.add(t);
            }
        }
        let h = (0.5f64).powi(level as i32);
        let value = acc.sum() * h * scale;
        if !value.is_finite() {
            return IntegralResult { value, error_estimate: f64::INFINITY, nodes_used, converged: false };
        }
        let error_estimate = prev.map_or(f64::INFINITY, |p| (value - p).abs());
        let converged = level + 1 >= MIN_LEVELS && spec.accepts(value, error_estimate);
        last = IntegralResult { value, error_estimate, nodes_used, converged };
        if converged {
            break;
        }
        prev = Some(value);
    }
    last
}

pub(super) fn angular(gamma: f64, f: &dyn Fn(f64) -> f64, spec: &QuadratureSpec) -> IntegralResult {
    let g1 = gamma + 1.0;
    drive(spec, 1.0, |n| {
        let log_w = g1 * ln_one_minus_tanh2(n.v) + n.ln_dv;
        if log_w < LOG_UNDERFLOW {
            return None;
        }
        Some(f(n.v.tanh()) * log_w.exp())
    })
}

pub(super) fn radial(power: f64, g: &dyn Fn(f64) -> f64, decay_scale: f64, spec: &QuadratureSpec) -> IntegralResult {
    // t = decay_scale·r = exp(v); ∫ r^p g(r) dr = s^−(p+1) ∫ t^p g(t/s) dt
    let p1 = power + 1.0;
    let outer = (-p1 * decay_scale.ln()).exp();
    drive(spec, outer, |n| {
        if n.v > RADIAL_T_MAX.ln() {
            return None;
        }
        let log_w = p1 * n.v + n.ln_dv;
        if log_w < LOG_UNDERFLOW {
            return None;
        }
        let gv = g(n.v.exp() / decay_scale);
        if gv == 0.0 {
            return Some(0.0);
        }
        Some(gv.signum() * (gv.abs().ln() + log_w).exp())
    })
}

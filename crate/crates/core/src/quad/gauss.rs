//! Composite Gauss-Legendre rules with panel doubling per level.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::{IntegralResult, QuadratureSpec};
use crate::specfun::NeumaierSum;

const POINTS: usize = 16;
const MIN_LEVELS: u32 = 2;

/// Nodes and weights of the n-point Gauss-Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(POINTS))
}

fn composite(a: f64, b: f64, spec: &QuadratureSpec, f: &dyn Fn(f64) -> f64) -> IntegralResult {
    let (xs, ws) = rule();
    let mut prev: Option<f64> = None;
    let mut nodes_used = 0usize;
    let mut last = IntegralResult { value: f64::NAN, error_estimate: f64::INFINITY, nodes_used: 0, converged: false };
    for level in 0..spec.max_levels {
        let panels = 1usize << level;
        if nodes_used + panels * POINTS > spec.node_budget {
            break;
        }
        let width = (b - a) / panels as f64;
        let mut acc = NeumaierSum::default();
        for p in 0..panels {
            let lo = a + width * p as f64;
            let mid = lo + 0.5 * width;
            for (x, w) in xs.iter().zip(ws) {
                acc.add(w * f(mid + 0.5 * width * x));
            }
        }
        nodes_used += panels * POINTS;
        let value = 0.5 * width * acc.sum();
        let error_estimate = prev.map_or(f64::INFINITY, |p| (value - p).abs());
        let converged = level + 1 >= MIN_LEVELS && value.is_finite() && spec.accepts(value, error_estimate);
        last = IntegralResult { value, error_estimate, nodes_used, converged };
        if converged {
            break;
        }
        prev = Some(value);
    }
    last
}

pub(super) fn angular(gamma: f64, f: &dyn Fn(f64) -> f64, spec: &QuadratureSpec) -> IntegralResult {
    composite(-1.0, 1.0, spec, &|x| ((1.0 - x) * (1.0 + x)).powf(gamma) * f(x))
}

pub(super) fn radial(power: f64, g: &dyn Fn(f64) -> f64, decay_scale: f64, spec: &QuadratureSpec) -> IntegralResult {
    // Integrate in t = decay_scale·r over [0, T], T where the integrand has died out.
    let h = |t: f64| t.powf(power) * g(t / decay_scale);
    let mut peak: f64 = 0.0;
    let mut quiet = 0;
    let mut cutoff = 1.0;
    let mut t = 0.5;
    while t < 1e4 {
        let v = h(t).abs();
        peak = peak.max(v);
        if v <= 1e-30 * peak {
            quiet += 1;
            if quiet >= 8 {
                cutoff = t;
                break;
            }
        } else {
            quiet = 0;
        }
        t += 0.5;
        cutoff = t;
    }
    let mut r = composite(0.0, cutoff, spec, &h);
    r.value /= decay_scale.powf(power + 1.0);
    r.error_estimate /= decay_scale.powf(power + 1.0);
    r
}

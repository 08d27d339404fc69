//! Numerical integration used as the independent oracle for every closed form.
//!
//! Two integral shapes occur:
//!
//! * radial: `∫₀^∞ r^p g(r) dr` with `g` smooth and exponentially decaying,
//! * angular: `∫₋₁¹ (1−x²)^γ g(x) dx` with `g` smooth and γ > −1.
//!
//! The algebraic factor is passed separately from the smooth part so the
//! double-exponential rule can evaluate it in log space, which keeps exponents
//! close to −1 accurate where `1 − x²` or `r` would underflow.

mod de;
mod gauss;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gauss::gauss_legendre;

/// Integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    GaussLegendreComposite,
    DoubleExponential,
}

/// Scheme, tolerances and budgets for one integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_levels: u32,
    pub node_budget: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            scheme: Scheme::DoubleExponential,
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_levels: 12,
            node_budget: 400_000,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter("quadrature tolerances must be positive".into()));
        }
        if self.max_levels < 1 {
            return Err(Error::InvalidParameter("max_levels must be at least 1".into()));
        }
        if self.node_budget < 16 {
            return Err(Error::InvalidParameter("node_budget must be at least 16".into()));
        }
        Ok(())
    }

    pub(crate) fn accepts(&self, value: f64, error: f64) -> bool {
        error <= self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Value and diagnostics of one integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub nodes_used: usize,
    pub converged: bool,
}

impl IntegralResult {
    /// A value known exactly without integrating (e.g. by a selection rule).
    pub fn exact(value: f64) -> Self {
        Self { value, error_estimate: 0.0, nodes_used: 0, converged: true }
    }

    /// Fail with [`Error::NonConvergence`] unless converged.
    pub fn require_converged(self, what: &str) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence(format!(
                "{what}: value {} with error estimate {:.3e} after {} nodes",
                self.value, self.error_estimate, self.nodes_used
            )))
        }
    }
}

/// `∫₀^∞ f(r) dr` for an integrand decaying like `exp(−decay_scale·r)`.
pub fn integrate_radial<F>(f: F, decay_scale: f64, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: Fn(f64) -> f64,
{
    integrate_radial_power(0.0, f, decay_scale, spec)
}

/// `∫₀^∞ r^power g(r) dr` with `g` smooth at the origin. Requires power > −1.
pub fn integrate_radial_power<F>(
    power: f64,
    g: F,
    decay_scale: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralResult>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    if !(decay_scale > 0.0 && decay_scale.is_finite()) {
        return Err(Error::InvalidParameter(format!("decay_scale must be positive, got {decay_scale}")));
    }
    if !(power > -1.0) {
        return Err(Error::Divergent(format!("radial integrand ~ r^{power} at the origin")));
    }
    Ok(match spec.scheme {
        Scheme::DoubleExponential => de::radial(power, &g, decay_scale, spec),
        Scheme::GaussLegendreComposite => gauss::radial(power, &g, decay_scale, spec),
    })
}

/// `∫₋₁¹ (1−x²)^endpoint_exponent f(x) dx` with `f` smooth on [−1, 1].
/// Requires endpoint_exponent > −1.
pub fn integrate_angular<F>(f: F, endpoint_exponent: f64, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    if !(endpoint_exponent > -1.0) {
        return Err(Error::Divergent(format!(
            "angular integrand ~ (1-x^2)^{endpoint_exponent} at x = ±1"
        )));
    }
    Ok(match spec.scheme {
        Scheme::DoubleExponential => de::angular(endpoint_exponent, &f, spec),
        Scheme::GaussLegendreComposite => gauss::angular(endpoint_exponent, &f, spec),
    })
}

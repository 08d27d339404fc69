//! The Hartmann ring-shaped model: parameters, quantum numbers, unperturbed
//! energies and the separable eigenfunctions ψ = R(r)/r · Θ(cos θ) · Φ(φ).
//!
//! Two angular couplings appear. The one returned by
//! [`HartmannModel::printed_ring_coupling`] is the coefficient of
//! `1/(r² sin²θ)` in the potential as usually written; the one returned by
//! [`HartmannModel::ring_coupling`] is `ħ²(k² − m²)/(2μ)`, the coefficient for
//! which the wavefunctions below are exact eigenfunctions with the stated k.
//! They coincide only when ħ² = 2μ. Everything that needs H₀ (the p⁴ matrix
//! elements in particular) uses [`HartmannModel::hamiltonian_potential`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{factorial, gegenbauer, laguerre, ln_gamma, PolyParams};

/// Relative threshold under which two unperturbed energies count as equal.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitName {
    Atomic,
    Si,
    Custom,
}

/// SI value of one internal unit of length, energy, mass and action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub name: UnitName,
    pub length: f64,
    pub energy: f64,
    pub mass: f64,
    pub action: f64,
}

impl UnitSystem {
    pub fn atomic() -> Self {
        Self {
            name: UnitName::Atomic,
            length: 5.291_772_109_03e-11,
            energy: 4.359_744_722_207_1e-18,
            mass: 9.109_383_701_5e-31,
            action: 1.054_571_817e-34,
        }
    }

    pub fn si() -> Self {
        Self { name: UnitName::Si, length: 1.0, energy: 1.0, mass: 1.0, action: 1.0 }
    }

    pub fn custom(length: f64, energy: f64, mass: f64, action: f64) -> Result<Self> {
        let u = Self { name: UnitName::Custom, length, energy, mass, action };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.length, self.energy, self.mass, self.action].iter().all(|s| *s > 0.0 && s.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter("unit scale factors must be positive".into()))
        }
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::atomic()
    }
}

/// Physical parameters of V(r,θ) = ησ²(e²/r + qħ²/(2μ r² sin²θ)) plus the
/// deformation β of [X, P] = iħ(1 + βP²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HartmannModel {
    pub mu: f64,
    pub e2: f64,
    pub hbar: f64,
    pub eta: f64,
    pub sigma: f64,
    pub q: f64,
    pub beta: f64,
    pub units: UnitSystem,
}

impl HartmannModel {
    /// Atomic units (μ = e² = ħ = 1), β = 0.
    pub fn atomic(eta: f64, sigma: f64, q: f64) -> Self {
        Self { mu: 1.0, e2: 1.0, hbar: 1.0, eta, sigma, q, beta: 0.0, units: UnitSystem::atomic() }
    }

    /// Coulomb limit with charge Z = ησ² (σ = 1).
    pub fn hydrogenic(z: f64) -> Self {
        Self::atomic(z, 1.0, 0.0)
    }

    #[must_use]
    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    /// Checks hard constraints; returns soft warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let finite = [self.mu, self.e2, self.hbar, self.eta, self.sigma, self.q, self.beta]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("model parameters must be finite".into()));
        }
        if !(self.mu > 0.0 && self.e2 > 0.0 && self.hbar > 0.0) {
            return Err(Error::InvalidParameter("mu, e2 and hbar must be positive".into()));
        }
        if !(self.eta > 0.0 && self.sigma > 0.0) {
            return Err(Error::InvalidParameter("eta and sigma must be positive".into()));
        }
        if self.beta < 0.0 {
            return Err(Error::InvalidParameter("beta must be non-negative".into()));
        }
        self.units.validate()?;
        let mut warnings = Vec::new();
        for (name, v) in [("eta", self.eta), ("sigma", self.sigma)] {
            if !(1.0..=10.0).contains(&v) {
                warnings.push(format!("{name} = {v} lies outside the usual range [1, 10]"));
            }
        }
        Ok(warnings)
    }

    /// ησ².
    pub fn coupling(&self) -> f64 {
        self.eta * self.sigma * self.sigma
    }

    /// A = ησ²e², strength of the Coulomb term.
    pub fn coulomb_strength(&self) -> f64 {
        self.coupling() * self.e2
    }

    /// μησ²e²/ħ², the inverse effective Bohr radius.
    pub fn inverse_bohr(&self) -> f64 {
        self.mu * self.coulomb_strength() / (self.hbar * self.hbar)
    }

    /// k₀² = qηħ²σ²/(2μ), the shift added to m² under the square root in k.
    pub fn k_shift(&self) -> f64 {
        self.q * self.eta * self.hbar * self.hbar * self.sigma * self.sigma / (2.0 * self.mu)
    }

    /// ħ²(k² − m²)/(2μ): coefficient of 1/(r² sin²θ) in H₀.
    pub fn ring_coupling(&self) -> f64 {
        self.hbar * self.hbar * self.k_shift() / (2.0 * self.mu)
    }

    /// ησ² qħ²/(2μ): coefficient of 1/(r² sin²θ) in the potential as written.
    pub fn printed_ring_coupling(&self) -> f64 {
        self.coupling() * self.q * self.hbar * self.hbar / (2.0 * self.mu)
    }

    pub fn k_for(&self, m: i32) -> Result<f64> {
        let radicand = f64::from(m) * f64::from(m) + self.k_shift();
        if radicand < 0.0 {
            return Err(Error::ImaginaryK { radicand });
        }
        Ok(radicand.sqrt())
    }

    /// k at m = 0.
    pub fn k0(&self) -> Result<f64> {
        self.k_for(0)
    }

    /// E⁰ = −μ(ησ²)²e⁴/(2ħ²) · (N + n + k + 1)⁻².
    pub fn energy_for(&self, principal: f64) -> f64 {
        let a = self.coulomb_strength();
        -self.mu * a * a / (2.0 * self.hbar * self.hbar) / (principal * principal)
    }

    /// Minimal position uncertainty ħ√β.
    pub fn minimal_length(&self) -> f64 {
        self.hbar * self.beta.sqrt()
    }

    pub fn state(&self, radial: u32, angular: u32, m: i32) -> Result<QuantumState> {
        QuantumState::derive(self, radial, angular, m)
    }

    /// All states with N + n ≤ max_level and |m| ≤ max_m. Channels whose k
    /// would be imaginary are left out.
    pub fn scan(&self, max_level: u32, max_m: u32) -> Vec<QuantumState> {
        let mut out = Vec::new();
        let max_m = max_m as i32;
        for m in -max_m..=max_m {
            if self.k_for(m).is_err() {
                continue;
            }
            for level in 0..=max_level {
                for n in 0..=level {
                    if let Ok(s) = self.state(level - n, n, m) {
                        out.push(s);
                    }
                }
            }
        }
        out
    }

    /// The potential exactly as written, ησ²(e²/r + qħ²/(2μ r² sin²θ)).
    pub fn potential(&self, r: f64, x: f64) -> Result<f64> {
        let s2 = sin2_checked(r, x, self.q)?;
        let ring = if self.q == 0.0 { 0.0 } else { self.printed_ring_coupling() / (r * r * s2) };
        Ok(self.coulomb_strength() / r + ring)
    }

    /// The potential of H₀ for which the eigenfunctions below are exact:
    /// −ησ²e²/r + ħ²(k² − m²)/(2μ r² sin²θ).
    pub fn hamiltonian_potential(&self, r: f64, x: f64) -> Result<f64> {
        let s2 = sin2_checked(r, x, self.q)?;
        let ring = if self.q == 0.0 { 0.0 } else { self.ring_coupling() / (r * r * s2) };
        Ok(-self.coulomb_strength() / r + ring)
    }
}

fn sin2_checked(r: f64, x: f64, q: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("r must be positive, got {r}")));
    }
    if x.abs() > 1.0 {
        return Err(Error::Domain(format!("|cos θ| must be at most 1, got {x}")));
    }
    let s2 = (1.0 - x) * (1.0 + x);
    if s2 == 0.0 && q != 0.0 {
        return Err(Error::Domain("potential is singular on the symmetry axis when q != 0".into()));
    }
    Ok(s2)
}

/// Quantum numbers (N, n, m) with every derived quantity of the state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumState {
    #[serde(rename = "N")]
    pub radial: u32,
    #[serde(rename = "n")]
    pub angular: u32,
    pub m: i32,
    pub k: f64,
    pub l: f64,
    pub n_prime: f64,
    /// 2μησ²e²/(ħ² n′)
    pub a: f64,
    pub e0: f64,
    ln_radial_norm: f64,
    angular_norm: f64,
}

impl QuantumState {
    fn derive(model: &HartmannModel, radial: u32, angular: u32, m: i32) -> Result<Self> {
        let k = model.k_for(m)?;
        let l = f64::from(angular) + k;
        let n_prime = f64::from(radial) + l + 1.0;
        let a = 2.0 * model.inverse_bohr() / n_prime;
        let e0 = model.energy_for(n_prime);
        // R normalization: sqrt(a/2 · N!/(n′ Γ(N + 2l + 2)))
        let ln_radial_norm = 0.5
            * ((0.5 * a).ln() + factorial(u64::from(radial)).ln()
                - n_prime.ln()
                - ln_gamma(f64::from(radial) + 2.0 * l + 2.0)?.0);
        Ok(Self {
            radial,
            angular,
            m,
            k,
            l,
            n_prime,
            a,
            e0,
            ln_radial_norm,
            angular_norm: angular_norm(angular, k)?,
        })
    }

    pub fn triple(&self) -> (u32, u32, i32) {
        (self.radial, self.angular, self.m)
    }

    pub fn label(&self) -> String {
        format!("|{}{}{}>", self.radial, self.angular, self.m)
    }

    pub fn degenerate_with(&self, other: &QuantumState) -> bool {
        (self.e0 - other.e0).abs() <= DEGENERACY_TOL * self.e0.abs()
    }

    /// Normalization constant of R times a^(l+1), so that
    /// R(r) = radial_prefactor · r^(l+1) · radial_smooth(r).
    pub fn radial_prefactor(&self) -> f64 {
        (self.ln_radial_norm + (self.l + 1.0) * self.a.ln()).exp()
    }

    /// e^(−ar/2) L_N^(2l+1)(ar)
    pub fn radial_smooth(&self, r: f64) -> f64 {
        let z = self.a * r;
        (-0.5 * z).exp() * laguerre(PolyParams::new(self.radial, 2.0 * self.l + 1.0), z)
    }

    /// R(r), the radial factor with ψ = R/r · Θ · Φ.
    pub fn radial_function(&self, r: f64) -> f64 {
        let z = self.a * r;
        (self.ln_radial_norm + (self.l + 1.0) * z.ln() - 0.5 * z).exp()
            * laguerre(PolyParams::new(self.radial, 2.0 * self.l + 1.0), z)
    }

    pub fn angular_norm(&self) -> f64 {
        self.angular_norm
    }

    /// Θ(x) = c · (1−x²)^(k/2) · C_n^(k+1/2)(x).
    pub fn angular_function(&self, x: f64) -> f64 {
        self.angular_norm * ((1.0 - x) * (1.0 + x)).powf(0.5 * self.k) * angular_poly(self.angular, self.k, x)
    }

    /// ψ(r, θ, φ) as (re, im).
    pub fn wavefunction(&self, r: f64, x: f64, phi: f64) -> Result<(f64, f64)> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("r must be positive, got {r}")));
        }
        if x.abs() > 1.0 {
            return Err(Error::Domain(format!("|cos θ| must be at most 1, got {x}")));
        }
        let amp = self.radial_function(r) / r * self.angular_function(x) / (2.0 * PI).sqrt();
        let mphi = f64::from(self.m) * phi;
        Ok((amp * mphi.cos(), amp * mphi.sin()))
    }
}

/// C_n^(k+1/2)(x), the polynomial part of Θ.
pub fn angular_poly(n: u32, k: f64, x: f64) -> f64 {
    gegenbauer(PolyParams::new(n, k + 0.5), x)
}

/// Normalization of Θ_{n,k} on [−1, 1]:
/// c² = [Γ(2k+1)/Γ(k+1)]² · n!(2n+2k+1) / (2^(2k+1) Γ(n+2k+1)).
pub fn angular_norm(n: u32, k: f64) -> Result<f64> {
    let ln_c2 = ln_angular_norm_sq_without_factorial(n, k)? + factorial(u64::from(n)).ln();
    Ok((0.5 * ln_c2).exp())
}

/// The same constant without the n! factor, as it is often quoted. It leaves
/// ∫Θ² dx = 1/n!.
pub fn printed_angular_norm(n: u32, k: f64) -> Result<f64> {
    Ok((0.5 * ln_angular_norm_sq_without_factorial(n, k)?).exp())
}

fn ln_angular_norm_sq_without_factorial(n: u32, k: f64) -> Result<f64> {
    let nf = f64::from(n);
    Ok(2.0 * (ln_gamma(2.0 * k + 1.0)?.0 - ln_gamma(k + 1.0)?.0) + (2.0 * nf + 2.0 * k + 1.0).ln()
        - (2.0 * k + 1.0) * std::f64::consts::LN_2
        - ln_gamma(nf + 2.0 * k + 1.0)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_angular, integrate_radial, integrate_radial_power, QuadratureSpec};

    #[test]
    fn hydrogen_ground_state() {
        let m = HartmannModel::hydrogenic(1.0);
        let s = m.state(0, 0, 0).unwrap();
        assert_eq!((s.k, s.l, s.n_prime), (0.0, 0.0, 1.0));
        assert_eq!(s.e0, -0.5);
        // ψ_1s = e^(−r)/√π
        for r in [0.1, 1.0, 2.5] {
            let (re, im) = s.wavefunction(r, 0.3, 1.1).unwrap();
            assert!((re - (-r).exp() / PI.sqrt()).abs() < 1e-14);
            assert_eq!(im, 0.0);
        }
    }

    #[test]
    fn k_substitution() {
        let m = HartmannModel::atomic(1.0, 1.0, 2.0);
        assert!((m.k_for(1).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.k0().unwrap(), 1.0);
    }

    #[test]
    fn imaginary_k() {
        let m = HartmannModel::atomic(1.0, 1.0, -2.0);
        assert!(matches!(m.state(0, 0, 0), Err(Error::ImaginaryK { .. })));
        assert!(m.state(0, 0, 2).is_ok());
        assert!(m.scan(2, 1).iter().all(|s| s.m != 0));
    }

    #[test]
    fn example_degenerate_pair() {
        for q in [0.0, 2.0, 8.0] {
            let m = HartmannModel::atomic(1.0, 1.0, q);
            let a = m.state(1, 0, 0).unwrap();
            let b = m.state(0, 1, 0).unwrap();
            assert_eq!(a.e0, b.e0);
            assert!(a.degenerate_with(&b));
        }
    }

    #[test]
    fn degeneracy_depends_on_level_and_abs_m() {
        let m = HartmannModel::atomic(1.3, 1.1, 0.7);
        let states = m.scan(3, 2);
        for s in &states {
            for t in &states {
                let same = s.radial + s.angular == t.radial + t.angular && s.m.abs() == t.m.abs();
                if same {
                    assert_eq!(s.e0, t.e0);
                }
            }
        }
    }

    #[test]
    fn energy_monotone_in_principal() {
        let m = HartmannModel::atomic(2.0, 1.5, 1.3);
        let mut states = m.scan(4, 3);
        states.sort_by(|a, b| a.n_prime.partial_cmp(&b.n_prime).unwrap());
        for w in states.windows(2) {
            if w[1].n_prime > w[0].n_prime {
                assert!(w[1].e0 > w[0].e0 && w[1].e0 < 0.0);
            }
        }
    }

    #[test]
    fn potential_as_written() {
        let m = HartmannModel::atomic(1.0, 1.0, 0.0);
        assert_eq!(m.potential(2.0, 0.4).unwrap(), 0.5);
        assert_eq!(m.potential(4.0, 0.4).unwrap(), 0.25);
        let m = HartmannModel::atomic(1.0, 1.0, 1.0);
        assert_eq!(m.potential(1.0, 0.0).unwrap(), 1.5);
        assert!(m.potential(1.0, 1.0).is_err());
        assert!(m.potential(0.0, 0.0).is_err());
        assert!(HartmannModel::hydrogenic(1.0).potential(1.0, 1.0).is_ok());
    }

    #[test]
    fn m_zero_phase_is_constant() {
        let m = HartmannModel::atomic(1.0, 1.0, 2.0);
        let s = m.state(1, 1, 0).unwrap();
        let a = s.wavefunction(1.3, 0.2, 0.0).unwrap();
        let b = s.wavefunction(1.3, 0.2, 2.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.1, 0.0);
    }

    #[test]
    fn normalization_by_quadrature() {
        let spec = QuadratureSpec::default();
        let model = HartmannModel::atomic(1.0, 1.0, 2.0);
        for (nr, na, m) in [(0, 0, 0), (2, 1, 1), (1, 3, -2), (0, 4, 0)] {
            let s = model.state(nr, na, m).unwrap();
            let rad = integrate_radial(|r| s.radial_function(r).powi(2), s.a, &spec).unwrap();
            let c = s.angular_norm();
            let ang = integrate_angular(|x| (c * angular_poly(na, s.k, x)).powi(2), s.k, &spec).unwrap();
            assert!((rad.value - 1.0).abs() < 1e-10, "{:?} radial {}", s.triple(), rad.value);
            assert!((ang.value - 1.0).abs() < 1e-10, "{:?} angular {}", s.triple(), ang.value);
        }
        // Hydrogen ground state with q = 0.
        let s = HartmannModel::hydrogenic(1.0).state(0, 0, 0).unwrap();
        let rad = integrate_radial(|r| s.radial_function(r).powi(2), s.a, &spec).unwrap();
        assert!((rad.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn angular_normalization_without_factorial_is_off_by_n_factorial() {
        let spec = QuadratureSpec::default();
        let k = 2f64.sqrt();
        for n in 0..5u32 {
            let c = printed_angular_norm(n, k).unwrap();
            let v = integrate_angular(|x| (c * angular_poly(n, k, x)).powi(2), k, &spec).unwrap().value;
            assert!((v * factorial(u64::from(n)) - 1.0).abs() < 1e-10, "n = {n}: {v}");
        }
    }

    /// Five-point central difference.
    fn derivative(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
    }

    /// ⟨T⟩ from finite-difference derivatives of u = R and Θ, independent of E⁰.
    fn kinetic_by_differences(model: &HartmannModel, s: &QuantumState) -> f64 {
        let spec = QuadratureSpec::default().with_tolerances(1e-12, 1e-10);
        let u = |r: f64| s.radial_function(r);
        let du2 = integrate_radial(|r| derivative(&u, r, 1e-3 * r).powi(2), s.a, &spec).unwrap().value;
        let u_r2 = integrate_radial_power(2.0 * s.l, |r| s.radial_prefactor().powi(2) * s.radial_smooth(r).powi(2), s.a, &spec)
            .unwrap()
            .value;
        // Λ = ∫ [(1−x²)Θ'² + m²Θ²/(1−x²)] dx, derivatives taken in θ.
        let theta = |t: f64| s.angular_function(t.cos());
        let mm = f64::from(s.m * s.m);
        let lam = integrate_angular(
            |x| {
                let t = x.acos();
                let h = 1e-3 * t.min(PI - t).max(1e-12);
                let w = (1.0 - x) * (1.0 + x);
                if w == 0.0 {
                    return 0.0;
                }
                let d = derivative(&theta, t, h);
                d * d / w + mm * s.angular_function(x).powi(2) / (w * w)
            },
            1.0,
            &spec,
        )
        .unwrap()
        .value;
        model.hbar * model.hbar / (2.0 * model.mu) * (du2 + u_r2 * lam)
    }

    fn potential_expectation(model: &HartmannModel, s: &QuantumState, ring: f64) -> f64 {
        let spec = QuadratureSpec::default();
        let r1 = integrate_radial(|r| s.radial_function(r).powi(2) / r, s.a, &spec).unwrap().value;
        let r2 = integrate_radial_power(2.0 * s.l, |r| s.radial_prefactor().powi(2) * s.radial_smooth(r).powi(2), s.a, &spec)
            .unwrap()
            .value;
        if ring == 0.0 {
            return -model.coulomb_strength() * r1;
        }
        let c = s.angular_norm();
        let sin2 = integrate_angular(|x| (c * angular_poly(s.angular, s.k, x)).powi(2), s.k - 1.0, &spec)
            .unwrap()
            .value;
        -model.coulomb_strength() * r1 + ring * r2 * sin2
    }

    #[test]
    fn hamiltonian_consistency_ground_state() {
        for q in [0.0, 2.0, 5.0] {
            let model = HartmannModel::atomic(1.0, 1.0, q);
            let s = model.state(0, 0, 0).unwrap();
            let t = kinetic_by_differences(&model, &s);
            let v = potential_expectation(&model, &s, model.ring_coupling());
            assert!(((t + v) - s.e0).abs() < 1e-7 * s.e0.abs(), "q = {q}: {} vs {}", t + v, s.e0);
            if q != 0.0 {
                // The coefficient as written does not reproduce E⁰ unless ħ² = 2μ.
                let vp = potential_expectation(&model, &s, model.printed_ring_coupling());
                assert!(((t + vp) - s.e0).abs() > 1e-3);
            }
        }
    }
}

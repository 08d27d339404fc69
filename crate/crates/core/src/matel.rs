//! Matrix elements ⟨bra| r^s |ket⟩ and ⟨bra| sin^(−2t)θ |ket⟩.
//!
//! Every closed form here is paired with a quadrature of the same integral.
//! The quadrature value is the authoritative one; the closed form is kept next
//! to it together with a [`Verdict`].
//!
//! Conventions: radial powers `s` are the literal exponent of r (s = −2 is
//! 1/r²); angular powers `t` count inverse powers, so t = 1 is 1/sin²θ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{angular_norm, angular_poly, printed_angular_norm, HartmannModel, QuantumState};
use crate::quad::{integrate_angular, integrate_radial_power, IntegralResult, QuadratureSpec};
use crate::specfun::{binomial, factorial, pochhammer, HypergeometricSpec, NeumaierSum, SignedLog};

/// Outcome of comparing a closed form with its quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Match,
    Mismatch,
    ClosedFormUnavailable,
}

impl Verdict {
    /// match ⇔ |cf − oracle| ≤ max(1e−9, 1e−8·|oracle|).
    pub fn assess(closed_form: Option<f64>, oracle: f64) -> Self {
        match closed_form {
            None => Verdict::ClosedFormUnavailable,
            Some(cf) if (cf - oracle).abs() <= 1e-9f64.max(1e-8 * oracle.abs()) => Verdict::Match,
            Some(_) => Verdict::Mismatch,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Match => "match",
            Verdict::Mismatch => "mismatch",
            Verdict::ClosedFormUnavailable => "closed_form_unavailable",
        }
    }
}

/// Which closed form an element was checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    /// ⟨r^−1⟩ … ⟨r^−4⟩ for a single state.
    RadialDiagonal,
    /// The finite triple sum for ∫R₁R₂r^s dr.
    RadialGeneral,
    /// The ₅F₄ forms for ⟨sin^−2θ⟩ and ⟨sin^−4θ⟩.
    AngularDiagonal5F4,
    /// The Gegenbauer-product sum for ∫(1−x²)^−t Θ₁Θ₂ dx.
    AngularOffdiagonal,
}

impl Formula {
    pub fn as_str(&self) -> &'static str {
        match self {
            Formula::RadialDiagonal => "radial_diagonal",
            Formula::RadialGeneral => "radial_general",
            Formula::AngularDiagonal5F4 => "angular_diagonal_5f4",
            Formula::AngularOffdiagonal => "angular_offdiagonal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// r^s
    Radial { s: i32 },
    /// sin^(−2t) θ
    Angular { t: i32 },
}

impl Observable {
    /// (s, t) as written in tables; the absent power is 0.
    pub fn powers(&self) -> (i32, i32) {
        match *self {
            Observable::Radial { s } => (s, 0),
            Observable::Angular { t } => (0, t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixElement {
    pub bra: QuantumState,
    pub ket: QuantumState,
    pub observable: Observable,
    pub formula: Formula,
    pub closed_form: Option<f64>,
    pub oracle: IntegralResult,
    pub verdict: Verdict,
}

impl MatrixElement {
    /// The authoritative (quadrature) value.
    pub fn value(&self) -> f64 {
        self.oracle.value
    }

    pub fn abs_err(&self) -> Option<f64> {
        self.closed_form.map(|cf| (cf - self.oracle.value).abs())
    }
}

/// Turns breakdowns of a closed form (poles, vanishing denominators, overflow)
/// into "unavailable"; other errors propagate.
pub(crate) fn closed(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        Ok(_) => Ok(None),
        Err(Error::Pole(_) | Error::VanishingDenominator { .. } | Error::Overflow(_) | Error::Domain(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn check_radial_convergence(bra: &QuantumState, ket: &QuantumState, s: i32) -> Result<f64> {
    let power = bra.l + ket.l + 2.0 + f64::from(s);
    if power > -1.0 {
        Ok(power)
    } else {
        Err(Error::Divergent(format!(
            "radial integral with s = {s} needs s > -(l1 + l2 + 3) = {}",
            -(bra.l + ket.l + 3.0)
        )))
    }
}

/// ∫₀^∞ R_bra R_ket r^s dr by quadrature.
pub fn radial_oracle(bra: &QuantumState, ket: &QuantumState, s: i32, spec: &QuadratureSpec) -> Result<IntegralResult> {
    let power = check_radial_convergence(bra, ket, s)?;
    let c = bra.radial_prefactor() * ket.radial_prefactor();
    let scale = 0.5 * (bra.a + ket.a);
    integrate_radial_power(power, |r| c * bra.radial_smooth(r) * ket.radial_smooth(r), scale, spec)
}

/// ∫₋₁¹ (1−x²)^(−t) Θ_{n1,k1} Θ_{n2,k2} dx by quadrature, k free. Negative t
/// gives positive powers of sin θ. Exactly 0 when n1 + n2 is odd.
pub fn angular_oracle_nk(n1: u32, k1: f64, n2: u32, k2: f64, t: i32, spec: &QuadratureSpec) -> Result<IntegralResult> {
    let exponent = 0.5 * (k1 + k2) - f64::from(t);
    if !(exponent > -1.0) {
        return Err(Error::Divergent(format!(
            "angular integral with t = {t} needs (k1 + k2)/2 - t > -1, got {exponent}"
        )));
    }
    if (n1 + n2) % 2 == 1 {
        return Ok(IntegralResult::exact(0.0));
    }
    let c = angular_norm(n1, k1)? * angular_norm(n2, k2)?;
    integrate_angular(|x| c * angular_poly(n1, k1, x) * angular_poly(n2, k2, x), exponent, spec)
}

pub fn angular_oracle(bra: &QuantumState, ket: &QuantumState, t: i32, spec: &QuadratureSpec) -> Result<IntegralResult> {
    angular_oracle_nk(bra.angular, bra.k, ket.angular, ket.k, t, spec)
}

/// Closed forms for ⟨r^s⟩, s ∈ {−1, −2, −3, −4}.
pub fn radial_diagonal(state: &QuantumState, s: i32) -> Result<f64> {
    check_radial_convergence(state, state, s)?;
    let (a, np, l) = (state.a, state.n_prime, state.l);
    Ok(match s {
        -1 => a / (2.0 * np),
        -2 => a * a / (2.0 * np * (2.0 * l + 1.0)),
        -3 => a.powi(3) / (2.0 * l * (2.0 * l + 1.0) * (2.0 * l + 2.0)),
        -4 => {
            a.powi(4) / np * (3.0 * np * np - l * (l + 1.0))
                / ((2.0 * l - 1.0) * 2.0 * l * (2.0 * l + 1.0) * (2.0 * l + 2.0) * (2.0 * l + 3.0))
        }
        _ => return Err(Error::InvalidParameter(format!("radial_diagonal covers s in -4..=-1, got {s}"))),
    })
}

/// The triple-sum closed form for ∫R₁R₂r^s dr. It is written for a common
/// radial number N; `Ok(None)` when N₁ ≠ N₂.
pub fn radial_general(bra: &QuantumState, ket: &QuantumState, s: i32) -> Result<Option<f64>> {
    check_radial_convergence(bra, ket, s)?;
    if bra.radial != ket.radial {
        return Ok(None);
    }
    closed(radial_general_sum(bra, ket, s))
}

fn radial_general_sum(bra: &QuantumState, ket: &QuantumState, s: i32) -> Result<f64> {
    let big_n = bra.radial;
    let nf = f64::from(big_n);
    let (l1, l2, n1, n2) = (bra.l, ket.l, bra.n_prime, ket.n_prime);
    // a = 2κ/n′, so κ is the same for both states.
    let kappa = 0.5 * bra.a * bra.n_prime;
    let sf = f64::from(s);
    let ll = l1 + l2 + sf;
    let root = SignedLog::one()
        .mul(factorial(u64::from(big_n)).powi(2))
        .div_gamma(2.0 * l1 + nf + 2.0)?
        .div_gamma(2.0 * l2 + nf + 2.0)?
        .sqrt();
    let pref = root
        .mul(kappa / (n1 * n2))
        .mul_pow(2.0 * kappa / n1, l1 + 1.0)
        .mul_pow(2.0 * kappa / n2, l2 + 1.0)
        .mul_pow(kappa * (1.0 / n1 + 1.0 / n2), -sf - l1 - l2 - 3.0);
    let rho = (1.0 / n1 - 1.0 / n2) / (1.0 / n1 + 1.0 / n2);
    let mut acc = NeumaierSum::default();
    for m1 in 0..=big_n {
        for m2 in 0..=big_n {
            let outer = SignedLog::one()
                .mul(if m2 % 2 == 0 { 1.0 } else { -1.0 })
                .div(factorial(u64::from(m1)) * factorial(u64::from(m2)))?
                .mul(rho.powi((m1 + m2) as i32))
                .mul_gamma(ll + f64::from(m1 + m2) + 3.0)?;
            if outer.is_zero() {
                continue;
            }
            let mut inner = NeumaierSum::default();
            for m3 in 0..=(big_n - m1).min(big_n - m2) {
                inner.add(
                    binomial(ll + f64::from(m2) + 1.0, big_n - m1 - m3)
                        * binomial(ll + f64::from(m1) + 1.0, big_n - m2 - m3)
                        * binomial(ll + f64::from(m1 + m2 + m3) + 2.0, m3),
                );
            }
            acc.add(outer.mul(inner.sum()).value());
        }
    }
    SignedLog::from_value(acc.sum())
        .mul(pref.sign())
        .mul_pow(std::f64::consts::E, pref.ln_abs())
        .checked_value("radial triple sum")
}

fn check_angular_convergence(k1: f64, k2: f64, t: i32) -> Result<()> {
    if 0.5 * (k1 + k2) - f64::from(t) > -1.0 {
        Ok(())
    } else {
        Err(Error::Divergent(format!("angular integral with t = {t} needs (k1 + k2)/2 - t > -1")))
    }
}

/// The ₅F₄ closed forms of ∫(1−x²)^(−t) Θ² dx for t ∈ {1, 2}, k free.
pub fn angular_diagonal_seed_nk(n: u32, k: f64, t: i32) -> Result<Option<f64>> {
    check_angular_convergence(k, k, t)?;
    let nf = f64::from(n);
    let (two_pow, g_num, g_den1, g_den2, extra_upper, extra_lower) = match t {
        1 => (4.0 * k - 3.0, 2.0 * k - 3.0, k - 1.5, k - 0.5, [k - 0.5, k], [k - 0.5, k + 0.5]),
        2 => (4.0 * k, 2.0 * k - 1.0, k - 0.5, k + 0.5, [k - 1.5, k - 1.0], [k - 1.5, k - 0.5]),
        _ => return Err(Error::InvalidParameter(format!("the 5F4 forms cover t = 1, 2; got {t}"))),
    };
    let value = || -> Result<f64> {
        let pref = SignedLog::one()
            .mul(std::f64::consts::PI)
            .mul_pow(2.0, -two_pow)
            .div(factorial(u64::from(n)).powi(2))?
            .mul(2.0 * nf + 2.0 * k + 1.0)
            .div_gamma(k + 1.0)?
            .div_gamma(k + 1.0)?
            .mul_gamma(nf + 2.0 * k + 1.0)?
            .mul_gamma(g_num)?
            .div_gamma(g_den1)?
            .div_gamma(g_den2)?;
        let f = HypergeometricSpec::new(
            vec![-nf, k + 0.5, nf + 2.0 * k + 1.0, extra_upper[0], extra_upper[1]],
            vec![k + 1.0, 2.0 * k + 1.0, extra_lower[0], extra_lower[1]],
            1.0,
        )
        .evaluate()?;
        pref.mul(f).checked_value("5F4 angular form")
    };
    closed(value())
}

pub fn angular_diagonal_seed(state: &QuantumState, t: i32) -> Result<Option<f64>> {
    angular_diagonal_seed_nk(state.angular, state.k, t)
}

/// ∫C_l^(θ)C_m^(μ)(1−x²)^(λ−1/2) dx by the finite p-sum with m = l − 2p + 2s.
fn gegenbauer_product_sum(l: u32, theta: f64, m: u32, mu: f64, lambda: f64) -> Result<f64> {
    let (lf, mf) = (f64::from(l), f64::from(m));
    let mut acc = NeumaierSum::default();
    for p in 0..=l / 2 {
        let twice_s = i64::from(m) - i64::from(l) + 2 * i64::from(p);
        if twice_s < 0 || twice_s % 2 != 0 || twice_s / 2 > i64::from(m / 2) {
            continue;
        }
        let s = (twice_s / 2) as u32;
        let (pf, sf) = (f64::from(p), f64::from(s));
        let term = SignedLog::one()
            .mul(lf - 2.0 * pf + lambda)
            .div(factorial(u64::from(l - 2 * p)) * factorial(u64::from(p)) * factorial(u64::from(s)))?
            .mul_gamma(lf - theta - pf)?
            .div_gamma(lf + lambda - pf + 1.0)?
            .mul_gamma(lf - 2.0 * pf + 2.0 * lambda)?
            .mul_gamma(mf + mu - sf)?
            .div_gamma(mf + lambda - sf + 1.0)?
            .mul(pochhammer(theta - lambda, p))
            .mul(pochhammer(mu - lambda, s));
        acc.add(term.checked_value("Gegenbauer product term")?);
    }
    let pref = SignedLog::one()
        .mul(std::f64::consts::PI)
        .mul_pow(2.0, 1.0 - 2.0 * lambda)
        .div_gamma(mu)?
        .div_gamma(theta)?;
    pref.mul(acc.sum()).checked_value("Gegenbauer product sum")
}

/// The Gegenbauer-product closed form for ∫(1−x²)^(−t) Θ₁Θ₂ dx, k free.
/// Exactly 0 for odd n1 + n2.
pub fn angular_offdiagonal_nk(n1: u32, k1: f64, n2: u32, k2: f64, t: i32) -> Result<Option<f64>> {
    check_angular_convergence(k1, k2, t)?;
    if (n1 + n2) % 2 == 1 {
        return Ok(Some(0.0));
    }
    let value = || -> Result<f64> {
        let norm = printed_angular_norm(n1, k1)? * printed_angular_norm(n2, k2)?;
        let lambda = 0.5 * (k1 + k2 + 1.0) - f64::from(t);
        Ok(norm * gegenbauer_product_sum(n1, k1 + 0.5, n2, k2 + 0.5, lambda)?)
    };
    closed(value())
}

fn element(
    bra: &QuantumState,
    ket: &QuantumState,
    observable: Observable,
    formula: Formula,
    closed_form: Option<f64>,
    oracle: IntegralResult,
) -> MatrixElement {
    MatrixElement {
        bra: *bra,
        ket: *ket,
        observable,
        formula,
        closed_form,
        verdict: Verdict::assess(closed_form, oracle.value),
        oracle,
    }
}

/// ⟨state| r^s |state⟩, s ∈ {−1, −2, −3, −4}.
pub fn radial_diagonal_element(state: &QuantumState, s: i32, spec: &QuadratureSpec) -> Result<MatrixElement> {
    let cf = closed(radial_diagonal(state, s))?;
    let oracle = radial_oracle(state, state, s, spec)?;
    Ok(element(state, state, Observable::Radial { s }, Formula::RadialDiagonal, cf, oracle))
}

/// ⟨bra| r^s |ket⟩ against the triple-sum form.
pub fn radial_element(bra: &QuantumState, ket: &QuantumState, s: i32, spec: &QuadratureSpec) -> Result<MatrixElement> {
    let cf = radial_general(bra, ket, s)?;
    let oracle = radial_oracle(bra, ket, s, spec)?;
    Ok(element(bra, ket, Observable::Radial { s }, Formula::RadialGeneral, cf, oracle))
}

/// ⟨state| sin^(−2t) |state⟩ against the ₅F₄ form, t ∈ {1, 2}.
pub fn angular_diagonal_element(state: &QuantumState, t: i32, spec: &QuadratureSpec) -> Result<MatrixElement> {
    let cf = angular_diagonal_seed(state, t)?;
    let oracle = angular_oracle(state, state, t, spec)?;
    Ok(element(state, state, Observable::Angular { t }, Formula::AngularDiagonal5F4, cf, oracle))
}

/// ⟨bra| sin^(−2t) |ket⟩ against the Gegenbauer-product form.
pub fn angular_element(bra: &QuantumState, ket: &QuantumState, t: i32, spec: &QuadratureSpec) -> Result<MatrixElement> {
    let cf = angular_offdiagonal_nk(bra.angular, bra.k, ket.angular, ket.k, t)?;
    let oracle = angular_oracle(bra, ket, t, spec)?;
    Ok(element(bra, ket, Observable::Angular { t }, Formula::AngularOffdiagonal, cf, oracle))
}

/// ⟨V⟩ and ⟨V²⟩ of the Hamiltonian potential between two states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialElements {
    pub v: f64,
    pub v2: f64,
}

/// ⟨bra|V|ket⟩ and ⟨bra|V²|ket⟩ for V = −A/r + C/(r² sin²θ), assembled from
/// converged radial and angular quadratures. Zero across different m.
pub fn potential_elements(
    model: &HartmannModel,
    bra: &QuantumState,
    ket: &QuantumState,
    spec: &QuadratureSpec,
) -> Result<PotentialElements> {
    if bra.m != ket.m {
        return Ok(PotentialElements { v: 0.0, v2: 0.0 });
    }
    let a = model.coulomb_strength();
    let c = model.ring_coupling();
    let rad = |s: i32| -> Result<f64> {
        Ok(radial_oracle(bra, ket, s, spec)?.require_converged(&format!("radial s = {s}"))?.value)
    };
    let ang = |t: i32| -> Result<f64> {
        Ok(angular_oracle(bra, ket, t, spec)?.require_converged(&format!("angular t = {t}"))?.value)
    };
    let ang0 = ang(0)?;
    let mut v = -a * rad(-1)? * ang0;
    let mut v2 = a * a * rad(-2)? * ang0;
    if c != 0.0 {
        let ang1 = ang(1)?;
        v += c * rad(-2)? * ang1;
        v2 += -2.0 * a * c * rad(-3)? * ang1 + c * c * rad(-4)? * ang(2)?;
    }
    Ok(PotentialElements { v, v2 })
}

//! Tables of ⟨r^s⟩ and ⟨sin^(2t)θ⟩ built by recurrence, with every cell
//! checked against quadrature.
//!
//! Radial cells come from the Kramers–Pasternack relation
//!
//! ```text
//! (s+1)/n′² ⟨r^s⟩ − (2s+1) a₀ ⟨r^(s−1)⟩ + (s/4)[(2l+1)² − s²] a₀² ⟨r^(s−2)⟩ = 0,
//! a₀ = ħ²/(μησ²e²),
//! ```
//!
//! seeded with ⟨r⁰⟩ = 1 and the closed forms of ⟨r⁻¹⟩ and ⟨r⁻²⟩. A second,
//! differently normalized three-term relation is evaluated alongside on the
//! same parents and only reported.
//!
//! Angular cells use a four-term relation in (n, k, t) that steps from the
//! n = 0 and n = 1 seeds. Here k is a free real parameter of the family
//! Θ_{n,k}: cells (n, k + j) are members of the family, not states of the
//! model. A relation value is shipped only where it agrees with quadrature;
//! otherwise the cell carries the quadrature value with provenance `oracle`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matel::{angular_oracle_nk, closed, radial_diagonal, radial_oracle, Verdict};
use crate::model::{HartmannModel, QuantumState};
use crate::quad::QuadratureSpec;
use crate::specfun::SignedLog;

pub const FREE_K_NOTE: &str =
    "angular cells treat k as a free parameter of the family Theta_{n,k}; (n, k+j) cells are not states of the model";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Seed,
    Recurrence,
    Oracle,
    /// Precondition failure; the cell has no value.
    Gap,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Seed => "seed",
            Provenance::Recurrence => "recurrence",
            Provenance::Oracle => "oracle",
            Provenance::Gap => "gap",
        }
    }
}

/// The three coefficients of ⟨r^s⟩, ⟨r^(s−1)⟩, ⟨r^(s−2)⟩ in the
/// Kramers–Pasternack relation at index s.
pub fn kramers_pasternack_coefficients(state: &QuantumState, s: i32) -> [f64; 3] {
    let a0 = 2.0 / (state.a * state.n_prime);
    let (sf, w) = (f64::from(s), 2.0 * state.l + 1.0);
    [
        (sf + 1.0) / (state.n_prime * state.n_prime),
        -(2.0 * sf + 1.0) * a0,
        0.25 * sf * (w * w - sf * sf) * a0 * a0,
    ]
}

/// The three-term relation as usually quoted for the same averages:
/// (ħ⁴a²/(4μ²e⁴))(s+1)⟨r^s⟩ − (ħn′a/(2μe²))⟨r^(s−1)⟩ + s[(2l+1)² − s²]/4 ⟨r^(s−2)⟩ = 0.
pub fn printed_radial_coefficients(model: &HartmannModel, state: &QuantumState, s: i32) -> [f64; 3] {
    let (sf, w) = (f64::from(s), 2.0 * state.l + 1.0);
    let (h, mu, e4) = (model.hbar, model.mu, model.e2 * model.e2);
    [
        h.powi(4) * state.a * state.a / (4.0 * mu * mu * e4) * (sf + 1.0),
        -h * state.n_prime * state.a / (2.0 * mu * model.e2),
        0.25 * sf * (w * w - sf * sf),
    ]
}

/// Solves c₀x₀ + c₁x₁ + c₂x₂ = 0 for the single unknown entry of `known`.
fn solve_three_term(coeffs: [f64; 3], known: [Option<f64>; 3], s: i32) -> Result<f64> {
    let unknown: Vec<usize> = (0..3).filter(|i| known[*i].is_none()).collect();
    let [i] = unknown[..] else {
        return Err(Error::MissingParent(format!("relation at s = {s} needs exactly one unknown")));
    };
    if coeffs[i] == 0.0 {
        return Err(Error::ZeroCoefficient { s });
    }
    let rest: f64 = (0..3).filter(|j| *j != i).map(|j| coeffs[j] * known[j].unwrap_or(0.0)).sum();
    Ok(-rest / coeffs[i])
}

/// ⟨r^s⟩ from ⟨r^(s−1)⟩ and ⟨r^(s−2)⟩.
pub fn radial_recurrence_step(state: &QuantumState, s: i32, lower1: f64, lower2: f64) -> Result<f64> {
    solve_three_term(kramers_pasternack_coefficients(state, s), [None, Some(lower1), Some(lower2)], s)
}

/// ⟨r^(s−2)⟩ from ⟨r^s⟩ and ⟨r^(s−1)⟩.
pub fn radial_recurrence_down(state: &QuantumState, s: i32, upper0: f64, upper1: f64) -> Result<f64> {
    solve_three_term(kramers_pasternack_coefficients(state, s), [Some(upper0), Some(upper1), None], s)
}

/// Same as [`radial_recurrence_step`] with the alternative coefficients.
pub fn printed_radial_step(model: &HartmannModel, state: &QuantumState, s: i32, lower1: f64, lower2: f64) -> Result<f64> {
    solve_three_term(printed_radial_coefficients(model, state, s), [None, Some(lower1), Some(lower2)], s)
}

pub fn printed_radial_down(model: &HartmannModel, state: &QuantumState, s: i32, upper0: f64, upper1: f64) -> Result<f64> {
    solve_three_term(printed_radial_coefficients(model, state, s), [Some(upper0), Some(upper1), None], s)
}

/// ⟨sin^(2t)θ⟩ for n ∈ {0, 1} in closed form.
pub fn angular_seed(n: u32, k: f64, t: i32) -> Result<f64> {
    if !(k > -0.5) || t < 0 {
        return Err(Error::InvalidParameter(format!("angular seed needs k > -1/2 and t >= 0, got k = {k}, t = {t}")));
    }
    let tf = f64::from(t);
    // [Γ(k+t+1)/Γ(k+1)]² 2^(2t)
    let common = SignedLog::one()
        .mul_pow(2.0, 2.0 * tf)
        .mul_gamma(k + tf + 1.0)?
        .mul_gamma(k + tf + 1.0)?
        .div_gamma(k + 1.0)?
        .div_gamma(k + 1.0)?;
    let v = match n {
        0 => common.mul_gamma(2.0 * k + 2.0)?.div_gamma(2.0 * k + 2.0 * tf + 2.0)?,
        1 => {
            let g = (0..4).try_fold(common, |acc, _| acc.mul_gamma(2.0 * k + 1.0))?;
            g.mul(2.0 * k + 3.0)
                .div(2.0 * k + 2.0 * tf + 3.0)?
                .div_gamma(2.0 * k + 2.0)?
                .div_gamma(2.0 * k + 2.0 * tf + 1.0)?
        }
        _ => return Err(Error::InvalidParameter(format!("angular seeds exist for n = 0, 1; got {n}"))),
    };
    v.checked_value("angular seed")
}

/// The four lower entries the angular relation consumes for ⟨sin^(2(t+1))⟩_{n,k}.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AngularParents {
    /// ⟨sin^(2t)⟩_{n,k}
    pub same: Option<f64>,
    /// ⟨sin^(2(t+1))⟩_{n−1,k+1}
    pub shifted_next: Option<f64>,
    /// ⟨sin^(2t)⟩_{n−1,k+1}
    pub shifted: Option<f64>,
    /// ⟨sin^(2t)⟩_{n−1,k}
    pub lower: Option<f64>,
}

/// ⟨sin^(2(t+1))θ⟩_{n,k} from its four parents.
pub fn angular_recurrence_step(n: u32, k: f64, t: i32, parents: AngularParents) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("angular relation needs n >= 1".into()));
    }
    let get = |v: Option<f64>, what: &str| {
        v.ok_or_else(|| Error::MissingParent(format!("{what} for n = {n}, k = {k}, t = {t}")))
    };
    let same = get(parents.same, "<sin^2t>_{n,k}")?;
    let shifted_next = get(parents.shifted_next, "<sin^2(t+1)>_{n-1,k+1}")?;
    let shifted = get(parents.shifted, "<sin^2t>_{n-1,k+1}")?;
    let lower = get(parents.lower, "<sin^2t>_{n-1,k}")?;
    let nf = f64::from(n);
    Ok(same - 0.25 * (nf + 2.0 * k + 1.0) * shifted_next
        - (nf + 2.0 * k + 2.0) * (nf + 2.0 * k + 1.0) / (nf * (2.0 * nf + 2.0 * k + 1.0)) * shifted
        - (nf + 2.0 * k + 2.0) / ((2.0 * nf + 2.0 * k + 1.0) * (2.0 * nf + 2.0 * k - 1.0)) * lower)
}

/// ⟨sin^(2t)θ⟩_{n,k} by quadrature.
pub fn sin_power_oracle(n: u32, k: f64, t: i32, spec: &QuadratureSpec) -> Result<f64> {
    Ok(angular_oracle_nk(n, k, n, k, -t, spec)?.require_converged(&format!("<sin^{}>_{{{n},{k}}}", 2 * t))?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialCell {
    pub s: i32,
    pub value: Option<f64>,
    pub provenance: Provenance,
    /// The alternative relation (or closed form, for seeds) on the same parents.
    pub printed_value: Option<f64>,
    pub oracle: Option<f64>,
    /// printed_value against the oracle.
    pub verdict: Option<Verdict>,
    /// Kramers–Pasternack value (the closed form, for seeds).
    pub validated_value: Option<f64>,
    pub validated_verdict: Option<Verdict>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularCell {
    pub n: u32,
    /// k + shift
    pub k: f64,
    pub shift: u32,
    pub t: i32,
    pub value: Option<f64>,
    pub provenance: Provenance,
    pub printed_value: Option<f64>,
    pub oracle: Option<f64>,
    pub verdict: Option<Verdict>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceTable {
    pub state: QuantumState,
    pub radial: Vec<RadialCell>,
    pub angular: Vec<AngularCell>,
    pub note: String,
}

impl RecurrenceTable {
    pub fn radial(&self, s: i32) -> Option<&RadialCell> {
        self.radial.iter().find(|c| c.s == s)
    }

    pub fn angular(&self, n: u32, shift: u32, t: i32) -> Option<&AngularCell> {
        self.angular.iter().find(|c| c.n == n && c.shift == shift && c.t == t)
    }

    /// ⟨r^p sin^(2s)θ⟩ for the table's own state, as a product of factors.
    pub fn combined(&self, p: i32, s: i32) -> Option<f64> {
        Some(self.radial(p)?.value? * self.angular(self.state.angular, 0, s)?.value?)
    }
}

fn radial_convergent(state: &QuantumState, s: i32) -> bool {
    2.0 * state.l + 3.0 + f64::from(s) > 0.0
}

fn gap_radial(s: i32, why: String) -> RadialCell {
    RadialCell {
        s,
        value: None,
        provenance: Provenance::Gap,
        printed_value: None,
        oracle: None,
        verdict: None,
        validated_value: None,
        validated_verdict: None,
        note: Some(why),
    }
}

fn radial_cells(
    model: &HartmannModel,
    state: &QuantumState,
    s_min: i32,
    s_max: i32,
    spec: &QuadratureSpec,
) -> Result<Vec<RadialCell>> {
    let oracle = |s: i32| -> Result<f64> {
        Ok(radial_oracle(state, state, s, spec)?.require_converged(&format!("<r^{s}>"))?.value)
    };
    let mut cells: std::collections::BTreeMap<i32, RadialCell> = Default::default();
    let value_of = |cells: &std::collections::BTreeMap<i32, RadialCell>, s: i32| cells.get(&s).and_then(|c| c.value);

    for (s, cf) in [(0, Some(1.0)), (-1, None), (-2, None)] {
        if !radial_convergent(state, s) {
            cells.insert(s, gap_radial(s, format!("<r^{s}> diverges for l = {}", state.l)));
            continue;
        }
        let cf = match cf {
            Some(v) => v,
            None => radial_diagonal(state, s)?,
        };
        let o = oracle(s)?;
        let verdict = Verdict::assess(Some(cf), o);
        cells.insert(
            s,
            RadialCell {
                s,
                value: Some(if verdict == Verdict::Match { cf } else { o }),
                provenance: if verdict == Verdict::Match { Provenance::Seed } else { Provenance::Oracle },
                printed_value: Some(cf),
                oracle: Some(o),
                verdict: Some(verdict),
                validated_value: Some(cf),
                validated_verdict: Some(verdict),
                note: None,
            },
        );
    }

    let make = |cells: &mut std::collections::BTreeMap<i32, RadialCell>,
                    s: i32,
                    validated: Result<f64>,
                    printed: Result<f64>|
     -> Result<()> {
        if !radial_convergent(state, s) {
            cells.insert(s, gap_radial(s, format!("<r^{s}> diverges for l = {}", state.l)));
            return Ok(());
        }
        let rec = match validated {
            Ok(v) => v,
            Err(e @ (Error::ZeroCoefficient { .. } | Error::MissingParent(_))) => {
                cells.insert(s, gap_radial(s, e.to_string()));
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        let printed = closed(printed).or_else(|e| match e {
            Error::ZeroCoefficient { .. } => Ok(None),
            e => Err(e),
        })?;
        let o = oracle(s)?;
        let validated_verdict = Verdict::assess(Some(rec), o);
        let ok = validated_verdict == Verdict::Match;
        cells.insert(
            s,
            RadialCell {
                s,
                value: Some(if ok { rec } else { o }),
                provenance: if ok { Provenance::Recurrence } else { Provenance::Oracle },
                printed_value: printed,
                oracle: Some(o),
                verdict: Some(Verdict::assess(printed, o)),
                validated_value: Some(rec),
                validated_verdict: Some(validated_verdict),
                note: None,
            },
        );
        Ok(())
    };

    let missing = |s: i32| Error::MissingParent(format!("parents of <r^{s}>"));
    for s in 1..=s_max {
        let parents = (value_of(&cells, s - 1), value_of(&cells, s - 2));
        let (v, p) = match parents {
            (Some(x1), Some(x2)) => {
                (radial_recurrence_step(state, s, x1, x2), printed_radial_step(model, state, s, x1, x2))
            }
            _ => (Err(missing(s)), Err(missing(s))),
        };
        make(&mut cells, s, v, p)?;
    }
    for target in (s_min..=-3).rev() {
        let j = target + 2;
        let parents = (value_of(&cells, j), value_of(&cells, j - 1));
        let (v, p) = match parents {
            (Some(x0), Some(x1)) => {
                (radial_recurrence_down(state, j, x0, x1), printed_radial_down(model, state, j, x0, x1))
            }
            _ => (Err(missing(target)), Err(missing(target))),
        };
        make(&mut cells, target, v, p)?;
    }
    Ok(cells.into_values().filter(|c| (s_min..=s_max).contains(&c.s)).collect())
}

fn angular_cells(state: &QuantumState, t_max: i32, spec: &QuadratureSpec) -> Result<Vec<AngularCell>> {
    use std::collections::BTreeMap;
    let top = state.angular;
    // (n, shift, t) → cell; n ascending so parents exist before children.
    let mut cells: BTreeMap<(u32, u32, i32), AngularCell> = BTreeMap::new();
    for n in 0..=top {
        for shift in 0..=(top - n) {
            let k = state.k + f64::from(shift);
            for t in 0..=t_max.max(0) {
                let o = sin_power_oracle(n, k, t, spec)?;
                let (printed, seeded) = if t == 0 {
                    (Ok(1.0), true)
                } else if n <= 1 {
                    (angular_seed(n, k, t), true)
                } else {
                    let get = |n: u32, shift: u32, t: i32| cells.get(&(n, shift, t)).and_then(|c| c.value);
                    let parents = AngularParents {
                        same: get(n, shift, t - 1),
                        shifted_next: get(n - 1, shift + 1, t),
                        shifted: get(n - 1, shift + 1, t - 1),
                        lower: get(n - 1, shift, t - 1),
                    };
                    (angular_recurrence_step(n, k, t - 1, parents), false)
                };
                let printed = match printed {
                    Err(e @ Error::MissingParent(_)) => {
                        cells.insert(
                            (n, shift, t),
                            AngularCell {
                                n,
                                k,
                                shift,
                                t,
                                value: None,
                                provenance: Provenance::Gap,
                                printed_value: None,
                                oracle: Some(o),
                                verdict: None,
                                note: Some(e.to_string()),
                            },
                        );
                        continue;
                    }
                    other => closed(other)?,
                };
                let verdict = Verdict::assess(printed, o);
                let ok = verdict == Verdict::Match;
                let provenance = match (ok, seeded) {
                    (false, _) => Provenance::Oracle,
                    (true, true) => Provenance::Seed,
                    (true, false) => Provenance::Recurrence,
                };
                cells.insert(
                    (n, shift, t),
                    AngularCell {
                        n,
                        k,
                        shift,
                        t,
                        value: Some(if ok { printed.unwrap_or(o) } else { o }),
                        provenance,
                        printed_value: printed,
                        oracle: Some(o),
                        verdict: Some(verdict),
                        note: None,
                    },
                );
            }
        }
    }
    Ok(cells.into_values().collect())
}

/// Builds the radial column for s ∈ [s_min, s_max] and the angular family
/// cells up to t_max for the given state.
pub fn build_table(
    model: &HartmannModel,
    state: &QuantumState,
    s_min: i32,
    s_max: i32,
    t_max: i32,
    spec: &QuadratureSpec,
) -> Result<RecurrenceTable> {
    if s_min > s_max {
        return Err(Error::InvalidParameter(format!("empty s range [{s_min}, {s_max}]")));
    }
    Ok(RecurrenceTable {
        state: *state,
        radial: radial_cells(model, state, s_min, s_max, spec)?,
        angular: angular_cells(state, t_max, spec)?,
        note: FREE_K_NOTE.to_string(),
    })
}

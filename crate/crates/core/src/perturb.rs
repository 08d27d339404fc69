//! First-order corrections from the β p⁴/μ term of the deformed Hamiltonian.
//!
//! With p² = 2μ(H₀ − V) and H₀ hermitian,
//! ⟨a|p⁴|b⟩ = 4μ²[E_a E_b δ_ab − (E_a + E_b)⟨a|V|b⟩ + ⟨a|V²|b⟩].
//! Inside a degenerate block E_a = E_b and this is the familiar −2E⟨V⟩ form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matel::{closed, potential_elements, Verdict};
use crate::model::{HartmannModel, QuantumState};
use crate::quad::QuadratureSpec;
use crate::specfun::{factorial, HypergeometricSpec, SignedLog};

/// Refuses states where ⟨sin⁻⁴θ⟩ diverges (q ≠ 0 and k ≤ 1).
pub fn check_first_order_validity(model: &HartmannModel, state: &QuantumState) -> Result<()> {
    if model.q != 0.0 && state.k <= 1.0 {
        return Err(Error::FirstOrderInvalid(format!(
            "state {} has k = {} <= 1 with q = {}: <sin^-4 theta> diverges, so <p^4> is infinite",
            state.label(),
            state.k,
            model.q
        )));
    }
    Ok(())
}

/// ⟨bra|p⁴|ket⟩ with the quadrature-fed ⟨V⟩ and ⟨V²⟩.
pub fn p4_element(model: &HartmannModel, bra: &QuantumState, ket: &QuantumState, spec: &QuadratureSpec) -> Result<f64> {
    check_first_order_validity(model, bra)?;
    check_first_order_validity(model, ket)?;
    if bra.m != ket.m {
        return Ok(0.0);
    }
    let pe = potential_elements(model, bra, ket, spec)?;
    let delta = if bra.triple() == ket.triple() { bra.e0 * ket.e0 } else { 0.0 };
    Ok(4.0 * model.mu * model.mu * (delta - (bra.e0 + ket.e0) * pe.v + pe.v2))
}

/// Eigenvalues (ascending) and column eigenvectors of a real symmetric
/// matrix by cyclic Jacobi rotations.
pub fn symmetric_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let norm: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off.sqrt() <= 1e-15 * norm || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|i, j| a[*i][*i].total_cmp(&a[*j][*j]));
    let values = order.iter().map(|i| a[*i][*i]).collect();
    let vectors = order.iter().map(|i| v.iter().map(|row| row[*i]).collect()).collect();
    (values, vectors)
}

/// States sharing one E⁰ with their p⁴ matrix and its eigen-decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateBlock {
    pub e0: f64,
    pub states: Vec<QuantumState>,
    pub p4_matrix: Vec<Vec<f64>>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// eigenvectors[i] belongs to eigenvalues[i], components in `states` order.
    pub eigenvectors: Vec<Vec<f64>>,
    /// (β/μ)·eigenvalue, ascending.
    pub corrections: Vec<f64>,
}

impl DegenerateBlock {
    /// Index into `states` of the largest component of eigenvector i.
    pub fn dominant_state(&self, i: usize) -> usize {
        let v = &self.eigenvectors[i];
        (0..v.len()).max_by(|a, b| v[*a].abs().total_cmp(&v[*b].abs()).then(b.cmp(a))).unwrap_or(0)
    }

    /// max over pairs of ‖Mv − λv‖ / ‖M‖.
    pub fn eigen_residual(&self) -> f64 {
        let m = &self.p4_matrix;
        let norm = m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        self.eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .map(|(l, v)| {
                m.iter()
                    .zip(v)
                    .map(|(row, vi)| {
                        let mv: f64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
                        (mv - l * vi).powi(2)
                    })
                    .sum::<f64>()
                    .sqrt()
                    / norm
            })
            .fold(0.0, f64::max)
    }
}

/// Builds and diagonalizes the p⁴ matrix of a set of degenerate states.
pub fn block_for_energy(model: &HartmannModel, states: &[QuantumState], spec: &QuadratureSpec) -> Result<DegenerateBlock> {
    let Some(first) = states.first() else {
        return Err(Error::InvalidParameter("empty degenerate block".into()));
    };
    if let Some(s) = states.iter().find(|s| !first.degenerate_with(s)) {
        return Err(Error::InvalidParameter(format!(
            "{} (E0 = {}) is not degenerate with {} (E0 = {})",
            s.label(),
            s.e0,
            first.label(),
            first.e0
        )));
    }
    for s in states {
        check_first_order_validity(model, s)?;
    }
    let n = states.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = p4_element(model, &states[i], &states[j], spec)?;
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    let (eigenvalues, eigenvectors) = symmetric_eigen(&m);
    let corrections = eigenvalues.iter().map(|l| model.beta / model.mu * l).collect();
    Ok(DegenerateBlock { e0: first.e0, states: states.to_vec(), p4_matrix: m, eigenvalues, eigenvectors, corrections })
}

/// Splits a state list into groups of equal E⁰, ordered by E⁰; each group
/// keeps the input order.
pub fn group_degenerate(states: &[QuantumState]) -> Vec<Vec<QuantumState>> {
    let mut groups: Vec<Vec<QuantumState>> = Vec::new();
    for s in states {
        match groups.iter_mut().find(|g| g[0].degenerate_with(s)) {
            Some(g) => g.push(*s),
            None => groups.push(vec![*s]),
        }
    }
    groups.sort_by(|a, b| a[0].e0.total_cmp(&b[0].e0));
    groups
}

/// Flags first-order results whose size exceeds 10% of the distance to the
/// nearest non-degenerate level.
pub fn first_order_advisory(correction: f64, e0: f64, other_levels: &[f64]) -> bool {
    let gap = other_levels
        .iter()
        .filter(|e| (*e - e0).abs() > crate::model::DEGENERACY_TOL * e0.abs())
        .map(|e| (e - e0).abs())
        .fold(f64::INFINITY, f64::min);
    correction.abs() > 0.1 * gap
}

/// Symbols and values of the closed-form corrections for |010⟩ and |100⟩.
///
/// The printed forms are brackets 4μ²[…] with no β/μ in front, i.e. they are
/// ⟨p⁴⟩ values; `p4_010`/`p4_100` hold them and `de_010`/`de_100` are
/// (β/μ) times them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplittingClosedForm {
    #[serde(rename = "A")]
    pub big_a: f64,
    #[serde(rename = "B")]
    pub big_b: f64,
    pub a: f64,
    pub b_010: f64,
    pub b_100: f64,
    pub k0: f64,
    pub e0: f64,
    pub p4_010: Option<f64>,
    pub p4_100: Option<f64>,
    pub de_010: Option<f64>,
    pub de_100: Option<f64>,
}

fn printed_b(n: u32, k: f64) -> Result<f64> {
    let nf = f64::from(n);
    SignedLog::one()
        .mul_gamma(2.0 * k + 1.0)?
        .mul_gamma(2.0 * k + 1.0)?
        .div_gamma(k + 1.0)?
        .div_gamma(k + 1.0)?
        .mul(2.0 * nf + 2.0 * k + 1.0)
        .mul_pow(2.0, -(2.0 * k + 1.0))
        .div_gamma(nf + 2.0 * k + 1.0)?
        .checked_value("b")
}

/// 2^p Γ(g)² / Γ(h)
fn gamma_ratio(p: f64, g: f64, h: f64) -> Result<f64> {
    SignedLog::one().mul_pow(2.0, p).mul_gamma(g)?.mul_gamma(g)?.div_gamma(h)?.checked_value("gamma ratio")
}

pub fn splitting_closed_form(model: &HartmannModel) -> Result<SplittingClosedForm> {
    let k0 = model.k0()?;
    if k0 <= 1.0 {
        return Err(Error::FirstOrderInvalid(format!(
            "k0 = {k0} <= 1: the closed forms contain Gamma(2 k0 - 2) and rest on <sin^-4 theta>, which diverges"
        )));
    }
    let big_a = model.coulomb_strength();
    let big_b = model.printed_ring_coupling();
    let n_prime = 2.0 + k0;
    let a = 2.0 * model.inverse_bohr() / n_prime;
    let e = model.energy_for(n_prime);
    let b_010 = printed_b(1, k0)?;
    let b_100 = printed_b(0, k0)?;
    let mu2 = 4.0 * model.mu * model.mu;
    let k = k0;

    let p010 = || -> Result<f64> {
        let b = b_010;
        let w = (2.0 * k + 1.0).powi(2);
        let d1 = gamma_ratio(2.0 * k + 1.0, k + 1.0, 2.0 * k + 2.0)? - gamma_ratio(2.0 * k + 3.0, k + 2.0, 2.0 * k + 4.0)?;
        let d2 = gamma_ratio(2.0 * k - 1.0, k, 2.0 * k)? - gamma_ratio(2.0 * k + 1.0, k + 1.0, 2.0 * k + 2.0)?;
        let d4 = gamma_ratio(2.0 * k - 1.0, k - 1.0, 2.0 * k - 2.0)? - gamma_ratio(2.0 * k + 1.0, k, 2.0 * k)?;
        let t = e * e - a * b * big_a * e * w / (k + 2.0) * d1
            - a * a * b * big_b * e * w / ((k + 2.0) * (2.0 * k + 3.0)) * d2
            + a * a * b * big_a * big_a * w / (2.0 * (k + 2.0) * (2.0 * k + 3.0)) * d1
            + a.powi(4) * b * big_b * big_b * (2.0 * k + 1.0) / (2.0 * (k + 2.0) * (2.0 * k + 3.0) * (2.0 * k + 2.0)) * d4
            + a.powi(3) * b * big_a * big_b * w / ((k + 2.0) * (2.0 * k + 3.0) * (2.0 * k + 2.0)) * d2;
        Ok(mu2 * t)
    };
    let p100 = || -> Result<f64> {
        let b = b_100;
        let t = e * e - a * b * big_a * e / (2.0 + k) * gamma_ratio(2.0 * k + 1.0, k + 1.0, 2.0 * k + 2.0)?
            - a * a * b * big_b * e * gamma_ratio(2.0 * k - 1.0, k, 2.0 * k)? / ((2.0 + k) * (2.0 * k + 1.0))
            + a * a * b * big_a * big_a * gamma_ratio(2.0 * k, k + 1.0, 2.0 * k + 2.0)? / ((2.0 + k) * (2.0 * k + 1.0))
            + a.powi(4) * b * big_b * big_b * (2.0 * k - 2.0) * (4.0 + k) * gamma_ratio(2.0 * k - 3.0, k - 1.0, 1.0)?
                / ((2.0 + k) * (2.0 * k + 3.0))
            + a.powi(3) * b * big_a * big_b * gamma_ratio(2.0 * k, k, 2.0 * k + 3.0)?;
        Ok(mu2 * t)
    };
    let p4_010 = closed(p010())?;
    let p4_100 = closed(p100())?;
    let scale = model.beta / model.mu;
    Ok(SplittingClosedForm {
        big_a,
        big_b,
        a,
        b_010,
        b_100,
        k0,
        e0: e,
        p4_010,
        p4_100,
        de_010: p4_010.map(|v| scale * v),
        de_100: p4_100.map(|v| scale * v),
    })
}

/// The closed form for the diagonal ⟨p⁴⟩ built from the ₅F₄ angular results.
/// The ring terms are dropped when q = 0.
pub fn printed_diagonal_p4(model: &HartmannModel, state: &QuantumState) -> Result<Option<f64>> {
    let (mu, h) = (model.mu, model.hbar);
    let (np, l, k, n) = (state.n_prime, state.l, state.k, state.angular);
    let nf = f64::from(n);
    let value = || -> Result<f64> {
        let mut brace = h * h / (8.0 * mu) * (h * h / 2.0 + np / (2.0 * l + 1.0));
        if model.q != 0.0 {
            let angular = |two_pow: f64, g_num: f64, g1: f64, g2: f64, up: [f64; 2], low: [f64; 2]| -> Result<f64> {
                let f = HypergeometricSpec::new(
                    vec![-nf, k + 0.5, nf + 2.0 * k + 1.0, up[0], up[1]],
                    vec![k + 1.0, 2.0 * k + 1.0, low[0], low[1]],
                    1.0,
                )
                .evaluate()?;
                SignedLog::one()
                    .mul(std::f64::consts::PI)
                    .mul_pow(2.0, -two_pow)
                    .div(factorial(u64::from(n)).powi(2))?
                    .mul(2.0 * nf + 2.0 * k + 1.0)
                    .div_gamma(k + 1.0)?
                    .div_gamma(k + 1.0)?
                    .mul_gamma(nf + 2.0 * k + 1.0)?
                    .mul_gamma(g_num)?
                    .div_gamma(g1)?
                    .div_gamma(g2)?
                    .mul(f)
                    .checked_value("diagonal angular factor")
            };
            let eqs = model.eta * model.q * model.sigma * model.sigma;
            let radial1 = 1.0 / (2.0 * np * (2.0 * l + 1.0))
                + 4.0 * np * SignedLog::one().mul_gamma(2.0 * l)?.div_gamma(2.0 * l + 3.0)?.value();
            let ang1 = angular(4.0 * k - 2.0, 2.0 * k - 3.0, k - 1.5, k - 0.5, [k - 0.5, k], [k - 0.5, k + 0.5])?;
            brace += eqs * h.powi(4) / mu * radial1 * ang1;
            let radial2 = (3.0 * np * np - l * (l + 1.0))
                * SignedLog::one().mul_gamma(2.0 * l - 1.0)?.div_gamma(2.0 * l + 4.0)?.value()
                / np;
            let ang2 = angular(4.0 * k + 2.0, 2.0 * k - 1.0, k - 0.5, k + 0.5, [k - 1.5, k - 1.0], [k - 1.5, k - 0.5])?;
            brace += eqs * eqs * h.powi(4) / mu * radial2 * ang2;
        }
        Ok(4.0 * mu * state.a.powi(4) / np.powi(8) * brace)
    };
    closed(value())
}

/// Numeric and closed-form diagonal ⟨p⁴⟩ of one state with ΔE = (β/μ)⟨p⁴⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalCorrection {
    pub state: QuantumState,
    pub p4: f64,
    pub delta_e: f64,
    pub p4_printed: Option<f64>,
    pub verdict: Verdict,
}

pub fn diagonal_correction(model: &HartmannModel, state: &QuantumState, spec: &QuadratureSpec) -> Result<DiagonalCorrection> {
    let p4 = p4_element(model, state, state, spec)?;
    let p4_printed = printed_diagonal_p4(model, state)?;
    Ok(DiagonalCorrection {
        state: *state,
        p4,
        delta_e: model.beta / model.mu * p4,
        p4_printed,
        verdict: Verdict::assess(p4_printed, p4),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn hydrogen_p4() {
        for z in [1.0, 2.0] {
            let model = HartmannModel::hydrogenic(z).with_beta(1e-3);
            let s = model.state(0, 0, 0).unwrap();
            let d = diagonal_correction(&model, &s, &spec()).unwrap();
            assert!((d.p4 - 5.0 * z.powi(4)).abs() < 1e-9 * z.powi(4), "{}", d.p4);
            assert!((d.delta_e - 5e-3 * z.powi(4)).abs() < 1e-12 * z.powi(4));
        }
    }

    #[test]
    fn jacobi_two_by_two_and_residual() {
        let m = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let (vals, vecs) = symmetric_eigen(&m);
        assert!((vals[0] - 1.0).abs() < 1e-15 && (vals[1] - 3.0).abs() < 1e-15);
        let b = DegenerateBlock {
            e0: -1.0,
            states: vec![],
            p4_matrix: m,
            eigenvalues: vals,
            eigenvectors: vecs,
            corrections: vec![],
        };
        assert!(b.eigen_residual() < 1e-14);
    }

    #[test]
    fn jacobi_random_symmetric() {
        let n = 6;
        let m: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| (((i * j * 7 + i + j) % 11) as f64).sin() + ((i + j) as f64).cos()).collect()).collect();
        let (vals, vecs) = symmetric_eigen(&m);
        let b = DegenerateBlock { e0: 0.0, states: vec![], p4_matrix: m.clone(), eigenvalues: vals.clone(), eigenvectors: vecs, corrections: vec![] };
        assert!(b.eigen_residual() < 1e-12);
        let trace: f64 = (0..n).map(|i| m[i][i]).sum();
        assert!((vals.iter().sum::<f64>() - trace).abs() < 1e-12);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn validity_guard() {
        let model = HartmannModel::atomic(1.0, 1.0, 0.5).with_beta(1e-4);
        let s = model.state(0, 0, 0).unwrap();
        assert!(s.k <= 1.0);
        assert!(matches!(diagonal_correction(&model, &s, &spec()), Err(Error::FirstOrderInvalid(_))));
        assert!(matches!(splitting_closed_form(&HartmannModel::hydrogenic(1.0)), Err(Error::FirstOrderInvalid(_))));
        // m = 2 has k > 1 in the same model.
        assert!(diagonal_correction(&model, &model.state(0, 0, 2).unwrap(), &spec()).is_ok());
    }

    #[test]
    fn degeneracy_lifted_for_k0_two() {
        let model = HartmannModel::atomic(1.0, 1.0, 8.0).with_beta(1e-4);
        let a = model.state(1, 0, 0).unwrap();
        let b = model.state(0, 1, 0).unwrap();
        let off = p4_element(&model, &a, &b, &spec()).unwrap();
        assert_eq!(off, 0.0);
        let block = block_for_energy(&model, &[a, b], &spec()).unwrap();
        let [c0, c1] = block.corrections[..] else { panic!() };
        assert!(c0 > 0.0 && c1 > 0.0);
        assert!((c1 - c0) / c1 > 1e-10);
        let swapped = block_for_energy(&model, &[b, a], &spec()).unwrap();
        for (x, y) in block.corrections.iter().zip(&swapped.corrections) {
            assert!(((x - y) / x).abs() < 1e-10);
        }
        let cf = splitting_closed_form(&model).unwrap();
        assert_eq!(cf.k0, 2.0);
        assert!(cf.p4_010.is_some() && cf.p4_100.is_some());
    }

    #[test]
    fn hydrogen_manifold_two_splits() {
        let model = HartmannModel::hydrogenic(1.0).with_beta(1e-3);
        let states: Vec<_> = model.scan(1, 1).into_iter().filter(|s| s.n_prime == 2.0).collect();
        assert_eq!(states.len(), 4);
        let block = block_for_energy(&model, &states, &spec()).unwrap();
        // 2s: ⟨p⁴⟩ = 13/16, 2p: 7/48 (Z = 1)
        let mut want = [13.0 / 16.0, 7.0 / 48.0, 7.0 / 48.0, 7.0 / 48.0];
        want.sort_by(f64::total_cmp);
        for (got, w) in block.eigenvalues.iter().zip(want) {
            assert!((got - w).abs() < 1e-9, "{got} vs {w}");
        }
    }

    #[test]
    fn block_of_one_is_diagonal_correction() {
        let model = HartmannModel::atomic(1.0, 1.0, 8.0).with_beta(2e-4);
        let s = model.state(0, 0, 0).unwrap();
        let block = block_for_energy(&model, &[s], &spec()).unwrap();
        let d = diagonal_correction(&model, &s, &spec()).unwrap();
        assert!((block.corrections[0] - d.delta_e).abs() <= 1e-14 * d.delta_e);
    }

    #[test]
    fn advisory() {
        assert!(!first_order_advisory(1e-4, -0.5, &[-0.5, -0.125]));
        assert!(first_order_advisory(0.05, -0.5, &[-0.5, -0.125]));
        assert!(!first_order_advisory(0.05, -0.5, &[-0.5]));
    }
}

//! Tables behind the command-line subcommands, their CSV rendering and the
//! fidelity report that checks every closed form against its quadrature.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::matel::{
    angular_diagonal_element, angular_element, angular_offdiagonal_nk, angular_oracle_nk, radial_diagonal_element,
    radial_element, MatrixElement, Verdict,
};
use crate::model::{HartmannModel, QuantumState};
use crate::perturb::{
    block_for_energy, first_order_advisory, group_degenerate, p4_element, printed_diagonal_p4, splitting_closed_form,
    DegenerateBlock, SplittingClosedForm,
};
use crate::quad::QuadratureSpec;
use crate::recurrence::{
    angular_recurrence_step, angular_seed, build_table, sin_power_oracle, AngularParents, RecurrenceTable,
};
use crate::specfun::{mixed_order_worst_residual, MixedOrderForm};

/// Relative separation under which two first-order corrections count as equal.
pub const SPLIT_TOL: f64 = 1e-10;

pub const SYMMETRIC_ENERGY_NOTE: &str =
    "p4 elements use 4mu^2[E_a E_b delta - (E_a + E_b)<V> + <V^2>]; inside a degenerate block this equals the -2E<V> form";

pub fn fmt_float(v: f64, display: bool) -> String {
    if display {
        format!("{v:.5e}")
    } else {
        format!("{v:.16e}")
    }
}

fn fmt_opt(v: Option<f64>, display: bool) -> String {
    v.map(|x| fmt_float(x, display)).unwrap_or_default()
}

fn fmt_opt_int(v: Option<i32>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_verdict(v: Option<Verdict>) -> String {
    v.map(|x| x.as_str().to_string()).unwrap_or_default()
}

fn io_error(e: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("write failed: {e}"))
}

fn write_table(out: &mut dyn Write, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(io_error)?;
    for row in rows {
        w.write_record(&row).map_err(io_error)?;
    }
    let bytes = w.into_inner().map_err(io_error)?;
    out.write_all(&bytes).map_err(io_error)
}

fn write_comment(out: &mut dyn Write, text: &str) -> Result<()> {
    writeln!(out, "# {text}").map_err(io_error)
}

/// Output of one subcommand: CSV for humans and spreadsheets, JSON via serde.
pub trait Report: Serialize {
    fn write_csv(&self, out: &mut dyn Write, display: bool) -> Result<()>;
}

// ---------------------------------------------------------------- spectrum

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    /// Index of the degenerate level, counted from the ground state.
    pub group: usize,
    #[serde(rename = "N")]
    pub radial: u32,
    pub n: u32,
    pub m: i32,
    pub k: f64,
    pub l: f64,
    pub n_prime: f64,
    pub e0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub model: HartmannModel,
    pub rows: Vec<SpectrumRow>,
}

pub fn spectrum(config: &RunConfig) -> Result<SpectrumReport> {
    let model = config.model()?;
    let mut states = model.scan(config.max_level, config.max_m);
    states.sort_by(|a, b| {
        a.e0.total_cmp(&b.e0).then(a.m.cmp(&b.m)).then(a.radial.cmp(&b.radial)).then(a.angular.cmp(&b.angular))
    });
    let mut rows = Vec::with_capacity(states.len());
    let mut group = 0;
    for (i, s) in states.iter().enumerate() {
        if i > 0 && !states[i - 1].degenerate_with(s) {
            group += 1;
        }
        rows.push(SpectrumRow { group, radial: s.radial, n: s.angular, m: s.m, k: s.k, l: s.l, n_prime: s.n_prime, e0: s.e0 });
    }
    Ok(SpectrumReport { model, rows })
}

impl Report for SpectrumReport {
    fn write_csv(&self, out: &mut dyn Write, display: bool) -> Result<()> {
        let f = |v| fmt_float(v, display);
        write_table(
            out,
            &["group", "N", "n", "m", "k", "l", "n_prime", "E0"],
            self.rows.iter().map(|r| {
                vec![r.group.to_string(), r.radial.to_string(), r.n.to_string(), r.m.to_string(), f(r.k), f(r.l), f(r.n_prime), f(r.e0)]
            }),
        )
    }
}

// ---------------------------------------------------------------- matel

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatelRow {
    pub formula: String,
    #[serde(rename = "N1")]
    pub radial1: u32,
    pub n1: u32,
    pub m1: i32,
    #[serde(rename = "N2")]
    pub radial2: u32,
    pub n2: u32,
    pub m2: i32,
    pub s: Option<i32>,
    pub t: Option<i32>,
    pub closed_form: Option<f64>,
    pub oracle: Option<f64>,
    pub abs_err: Option<f64>,
    /// match, mismatch, closed_form_unavailable or oracle_not_converged.
    pub verdict: String,
}

impl MatelRow {
    fn from_element(e: &MatrixElement) -> Self {
        let (s, t) = match e.observable {
            crate::matel::Observable::Radial { s } => (Some(s), None),
            crate::matel::Observable::Angular { t } => (None, Some(t)),
        };
        MatelRow {
            formula: e.formula.as_str().to_string(),
            radial1: e.bra.radial,
            n1: e.bra.angular,
            m1: e.bra.m,
            radial2: e.ket.radial,
            n2: e.ket.angular,
            m2: e.ket.m,
            s,
            t,
            closed_form: e.closed_form,
            oracle: Some(e.oracle.value),
            abs_err: e.abs_err(),
            verdict: if e.oracle.converged { e.verdict.as_str() } else { "oracle_not_converged" }.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatelReport {
    pub model: HartmannModel,
    pub rows: Vec<MatelRow>,
}

#[derive(Debug, Clone, Copy)]
enum MatelJob {
    RadialDiagonal(QuantumState, i32),
    RadialGeneral(QuantumState, QuantumState, i32),
    AngularDiagonal(QuantumState, i32),
    AngularOffdiagonal(QuantumState, QuantumState, i32),
}

/// Skips elements whose integral diverges; other errors propagate.
fn skip_divergent<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Divergent(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn matel(config: &RunConfig, exec: Execution) -> Result<MatelReport> {
    let model = config.model()?;
    let spec = config.quadrature()?;
    let states = model.scan(config.max_level, config.max_m);
    let t_max = i32::try_from(config.t_max).unwrap_or(i32::MAX);
    let mut jobs = Vec::new();
    for (i, a) in states.iter().enumerate() {
        for s in config.s_min.max(-4)..=config.s_max.min(-1) {
            jobs.push(MatelJob::RadialDiagonal(*a, s));
        }
        for t in 1..=t_max.min(2) {
            jobs.push(MatelJob::AngularDiagonal(*a, t));
        }
        for b in states[i..].iter().filter(|b| b.m == a.m) {
            for s in config.s_min..=config.s_max {
                jobs.push(MatelJob::RadialGeneral(*a, *b, s));
            }
            for t in 1..=t_max {
                jobs.push(MatelJob::AngularOffdiagonal(*a, *b, t));
            }
        }
    }
    let results = exec.map(&jobs, |job| {
        let r = match *job {
            MatelJob::RadialDiagonal(a, s) => radial_diagonal_element(&a, s, &spec),
            MatelJob::RadialGeneral(a, b, s) => radial_element(&a, &b, s, &spec),
            MatelJob::AngularDiagonal(a, t) => angular_diagonal_element(&a, t, &spec),
            MatelJob::AngularOffdiagonal(a, b, t) => angular_element(&a, &b, t, &spec),
        };
        skip_divergent(r).map(|e| e.map(|e| MatelRow::from_element(&e)))
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    Ok(MatelReport { model, rows })
}

impl Report for MatelReport {
    fn write_csv(&self, out: &mut dyn Write, display: bool) -> Result<()> {
        write_table(
            out,
            &["formula", "N1", "n1", "m1", "N2", "n2", "m2", "s", "t", "closed_form", "oracle", "abs_err", "verdict"],
            self.rows.iter().map(|r| {
                vec![
                    r.formula.clone(),
                    r.radial1.to_string(),
                    r.n1.to_string(),
                    r.m1.to_string(),
                    r.radial2.to_string(),
                    r.n2.to_string(),
                    r.m2.to_string(),
                    fmt_opt_int(r.s),
                    fmt_opt_int(r.t),
                    fmt_opt(r.closed_form, display),
                    fmt_opt(r.oracle, display),
                    fmt_opt(r.abs_err, display),
                    r.verdict.clone(),
                ]
            }),
        )
    }
}

// ---------------------------------------------------------------- splitting

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingRow {
    pub block_id: usize,
    #[serde(rename = "E0")]
    pub e0: f64,
    #[serde(rename = "N")]
    pub radial: u32,
    pub n: u32,
    pub m: i32,
    /// (β/μ)·eigenvalue whose eigenvector is dominated by this state.
    pub de_numeric: Option<f64>,
    pub de_printed: Option<f64>,
    /// Printed against numeric, compared as ⟨p⁴⟩ so that β = 0 still decides.
    pub verdict: Option<Verdict>,
    pub validity_flags: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockOutcome {
    pub block_id: usize,
    pub e0: f64,
    pub m: i32,
    pub block: Option<DegenerateBlock>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelStatus {
    Nondegenerate,
    Lifted,
    PartiallyLifted,
    Surviving,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    #[serde(rename = "E0")]
    pub e0: f64,
    pub states: usize,
    pub distinct_corrections: usize,
    pub status: LevelStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingReport {
    pub model: HartmannModel,
    pub closed_form: Option<SplittingClosedForm>,
    pub closed_form_error: Option<String>,
    pub blocks: Vec<BlockOutcome>,
    pub rows: Vec<SplittingRow>,
    pub levels: Vec<LevelSummary>,
    pub notes: Vec<String>,
}

/// Number of clusters among `values` separated by more than SPLIT_TOL
/// relative to the largest magnitude.
pub fn distinct_count(values: &[f64]) -> usize {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let scale = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if v.is_empty() {
        return 0;
    }
    1 + v.windows(2).filter(|w| w[1] - w[0] > SPLIT_TOL * scale).count()
}

/// Pairs each eigenvalue (ascending) with the unassigned state carrying the
/// largest share of its eigenvector.
fn assign_states(block: &DegenerateBlock) -> Vec<usize> {
    let n = block.states.len();
    let mut taken = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for v in &block.eigenvectors {
        let best = (0..n)
            .filter(|i| !taken[*i])
            .max_by(|a, b| v[*a].abs().total_cmp(&v[*b].abs()).then(b.cmp(a)))
            .unwrap_or(0);
        taken[best] = true;
        out.push(best);
    }
    out
}

pub fn splitting(config: &RunConfig, exec: Execution) -> Result<SplittingReport> {
    let model = config.model()?;
    let spec = config.quadrature()?;
    let states = model.scan(config.max_level, config.max_m);
    let levels_e0: Vec<f64> = group_degenerate(&states).iter().map(|g| g[0].e0).collect();

    // Blocks are degenerate levels split by m: p⁴ does not couple different m.
    let mut sectors: Vec<(f64, i32, Vec<QuantumState>)> = Vec::new();
    for level in group_degenerate(&states) {
        let ms: BTreeSet<i32> = level.iter().map(|s| s.m).collect();
        for m in ms {
            sectors.push((level[0].e0, m, level.iter().filter(|s| s.m == m).copied().collect()));
        }
    }
    let results = exec.map(&sectors, |(_, _, members)| block_for_energy(&model, members, &spec));

    let (closed_form, closed_form_error) = match splitting_closed_form(&model) {
        Ok(c) => (Some(c), None),
        Err(e @ (Error::FirstOrderInvalid(_) | Error::ImaginaryK { .. })) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let printed_for = |s: &QuantumState| -> Option<(Option<f64>, Option<f64>)> {
        let c = closed_form.as_ref()?;
        match s.triple() {
            (0, 1, 0) => Some((c.p4_010, c.de_010)),
            (1, 0, 0) => Some((c.p4_100, c.de_100)),
            _ => None,
        }
    };

    let mut blocks = Vec::new();
    let mut rows = Vec::new();
    for (block_id, ((e0, m, members), result)) in sectors.iter().zip(results).enumerate() {
        match result {
            Ok(block) => {
                for (i, state_idx) in assign_states(&block).into_iter().enumerate() {
                    let s = block.states[state_idx];
                    let de = block.corrections[i];
                    let mut flags = Vec::new();
                    if first_order_advisory(de, *e0, &levels_e0) {
                        flags.push("advisory_large_correction");
                    }
                    let (de_printed, verdict) = match printed_for(&s) {
                        Some((p4, de_p)) => (de_p, Some(Verdict::assess(p4, block.eigenvalues[i]))),
                        None => (None, None),
                    };
                    rows.push(SplittingRow {
                        block_id,
                        e0: *e0,
                        radial: s.radial,
                        n: s.angular,
                        m: s.m,
                        de_numeric: Some(de),
                        de_printed,
                        verdict,
                        validity_flags: flags.join(";"),
                    });
                }
                blocks.push(BlockOutcome { block_id, e0: *e0, m: *m, block: Some(block), error: None });
            }
            Err(e @ (Error::FirstOrderInvalid(_) | Error::Divergent(_) | Error::NonConvergence(_))) => {
                let flag = match e {
                    Error::FirstOrderInvalid(_) => "first_order_invalid",
                    Error::Divergent(_) => "divergent",
                    _ => "oracle_not_converged",
                };
                for s in members {
                    let (de_printed, _) = printed_for(s).unwrap_or((None, None));
                    rows.push(SplittingRow {
                        block_id,
                        e0: *e0,
                        radial: s.radial,
                        n: s.angular,
                        m: s.m,
                        de_numeric: None,
                        de_printed,
                        verdict: None,
                        validity_flags: flag.to_string(),
                    });
                }
                blocks.push(BlockOutcome { block_id, e0: *e0, m: *m, block: None, error: Some(e.to_string()) });
            }
            Err(e) => return Err(e),
        }
    }

    let levels = group_degenerate(&states)
        .iter()
        .map(|level| {
            let e0 = level[0].e0;
            let mine: Vec<&BlockOutcome> = blocks.iter().filter(|b| b.e0 == e0).collect();
            let corrections: Vec<f64> =
                mine.iter().filter_map(|b| b.block.as_ref()).flat_map(|b| b.corrections.iter().copied()).collect();
            let distinct = distinct_count(&corrections);
            let status = if mine.iter().any(|b| b.block.is_none()) {
                LevelStatus::Invalid
            } else if level.len() == 1 {
                LevelStatus::Nondegenerate
            } else if distinct == level.len() {
                LevelStatus::Lifted
            } else if distinct > 1 {
                LevelStatus::PartiallyLifted
            } else {
                LevelStatus::Surviving
            };
            LevelSummary { e0, states: level.len(), distinct_corrections: distinct, status }
        })
        .collect();

    let mut notes = vec![SYMMETRIC_ENERGY_NOTE.to_string()];
    notes.push("printed corrections are compared with the numeric ones as <p^4> values; dE = (beta/mu) <p^4>".into());
    if model.q != 0.0 {
        notes.push("first-order corrections are refused where <sin^-4 theta> diverges (k <= 1, q != 0)".into());
    }
    Ok(SplittingReport { model, closed_form, closed_form_error, blocks, rows, levels, notes })
}

impl SplittingReport {
    pub fn summary_lines(&self) -> Vec<String> {
        let count = |st: LevelStatus| self.levels.iter().filter(|l| l.status == st).count();
        let mut out = vec![format!(
            "levels: {} | lifted {} | partially lifted {} | surviving {} | nondegenerate {} | invalid {}",
            self.levels.len(),
            count(LevelStatus::Lifted),
            count(LevelStatus::PartiallyLifted),
            count(LevelStatus::Surviving),
            count(LevelStatus::Nondegenerate),
            count(LevelStatus::Invalid),
        )];
        for l in &self.levels {
            if l.states > 1 {
                out.push(format!(
                    "E0 = {:.10e}: {} states, {} distinct corrections ({:?})",
                    l.e0, l.states, l.distinct_corrections, l.status
                ));
            }
        }
        if let Some(e) = &self.closed_form_error {
            out.push(format!("closed-form |010>/|100> corrections not evaluated: {e}"));
        }
        out
    }
}

impl Report for SplittingReport {
    fn write_csv(&self, out: &mut dyn Write, display: bool) -> Result<()> {
        for n in &self.notes {
            write_comment(out, n)?;
        }
        write_table(
            out,
            &["block_id", "E0", "N", "n", "m", "dE_numeric", "dE_printed", "verdict", "validity_flags"],
            self.rows.iter().map(|r| {
                vec![
                    r.block_id.to_string(),
                    fmt_float(r.e0, display),
                    r.radial.to_string(),
                    r.n.to_string(),
                    r.m.to_string(),
                    fmt_opt(r.de_numeric, display),
                    fmt_opt(r.de_printed, display),
                    fmt_verdict(r.verdict),
                    r.validity_flags.clone(),
                ]
            }),
        )
    }
}

// ---------------------------------------------------------------- recurrence

pub fn recurrence(config: &RunConfig) -> Result<RecurrenceTable> {
    let model = config.model()?;
    let state = config.selected_state()?;
    let t_max = i32::try_from(config.t_max).unwrap_or(i32::MAX);
    build_table(&model, &state, config.s_min, config.s_max, t_max, &config.quadrature()?)
}

impl Report for RecurrenceTable {
    fn write_csv(&self, out: &mut dyn Write, display: bool) -> Result<()> {
        write_comment(out, &format!("state {} k = {} l = {}", self.state.label(), self.state.k, self.state.l))?;
        write_comment(out, &self.note)?;
        write_comment(out, "radial")?;
        write_table(
            out,
            &["s", "value", "provenance", "printed_value", "verdict", "oracle", "validated_value", "validated_verdict", "note"],
            self.radial.iter().map(|c| {
                vec![
                    c.s.to_string(),
                    fmt_opt(c.value, display),
                    c.provenance.as_str().to_string(),
                    fmt_opt(c.printed_value, display),
                    fmt_verdict(c.verdict),
                    fmt_opt(c.oracle, display),
                    fmt_opt(c.validated_value, display),
                    fmt_verdict(c.validated_verdict),
                    c.note.clone().unwrap_or_default(),
                ]
            }),
        )?;
        write_comment(out, "angular")?;
        write_table(
            out,
            &["n", "k", "shift", "t", "value", "provenance", "printed_value", "verdict", "oracle", "note"],
            self.angular.iter().map(|c| {
                vec![
                    c.n.to_string(),
                    fmt_float(c.k, display),
                    c.shift.to_string(),
                    c.t.to_string(),
                    fmt_opt(c.value, display),
                    c.provenance.as_str().to_string(),
                    fmt_opt(c.printed_value, display),
                    fmt_verdict(c.verdict),
                    fmt_opt(c.oracle, display),
                    c.note.clone().unwrap_or_default(),
                ]
            }),
        )
    }
}

// ---------------------------------------------------------------- verify

pub const NOT_CONVERGED: &str = "oracle_not_converged";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub section: String,
    pub case: String,
    pub printed: Option<f64>,
    pub oracle: Option<f64>,
    pub abs_err: Option<f64>,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionSummary {
    pub section: String,
    pub description: String,
    pub cases: usize,
    pub matched: usize,
    pub mismatched: usize,
    pub unavailable: usize,
    pub not_converged: usize,
    pub worst_abs_err: Option<f64>,
    pub worst_rel_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub summary: Vec<SectionSummary>,
    pub rows: Vec<VerifyRow>,
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn not_converged(&self) -> usize {
        self.summary.iter().map(|s| s.not_converged).sum()
    }

    pub fn find(&self, section: &str, case: &str) -> Option<&VerifyRow> {
        self.rows.iter().find(|r| r.section == section && r.case == case)
    }
}

pub const SECTIONS: [(&str, &str); 13] = [
    ("gegenbauer_mixed_order", "worst residual of 2a(1-x^2)C_{n-1}^(a+1) = c C_{n-1}^(a) - n x C_n^(a) on [-1,1], n <= 8; printed c = 2a+n+1, standard c = 2a+n-1"),
    ("radial_diagonal", "closed forms for <r^-1> .. <r^-4>"),
    ("radial_general", "triple-sum form of the radial integral between two states (equal N)"),
    ("angular_diagonal_5f4", "5F4 forms of <sin^-2> and <sin^-4>"),
    ("angular_offdiagonal", "Gegenbauer-product form of the angular integral between two states"),
    ("angular_parity_zero", "angular integrals with n1 + n2 odd vanish"),
    ("radial_recurrence_validated", "Kramers-Pasternack relation from seeds <r^0>, <r^-1>, <r^-2>"),
    ("radial_recurrence_printed", "three-term radial relation with the printed coefficients, on shipped parents"),
    ("angular_seed_n0", "closed form of <sin^2t>_{0,k}"),
    ("angular_seed_n1", "closed form of <sin^2t>_{1,k}"),
    ("angular_recurrence", "printed relation for <sin^2(t+1)>_{n,k} on quadrature parents"),
    ("splitting_closed_form", "closed-form <p^4> of |010> and |100> against the numeric block"),
    ("diagonal_p4", "closed-form diagonal <p^4> against the numeric value"),
];

#[derive(Debug, Clone, Copy)]
enum VerifyJob {
    Identity(f64, MixedOrderForm),
    RadialDiagonal(QuantumState, i32),
    RadialGeneral(QuantumState, QuantumState, i32),
    AngularDiagonal(QuantumState, i32),
    AngularOff(u32, u32, f64, i32),
    Parity(u32, u32, f64, i32),
    RadialRecurrence(HartmannModel, QuantumState),
    Seed(u32, f64, i32),
    AngularRecurrence(u32, f64, i32),
    Splitting(HartmannModel),
    DiagonalP4(HartmannModel, QuantumState),
}

fn row(section: &str, case: String, printed: Option<f64>, oracle: f64, converged: bool) -> VerifyRow {
    VerifyRow {
        section: section.to_string(),
        case,
        printed,
        oracle: Some(oracle),
        abs_err: printed.map(|p| (p - oracle).abs()),
        verdict: if converged { Verdict::assess(printed, oracle).as_str() } else { NOT_CONVERGED }.to_string(),
    }
}

fn not_converged_row(section: &str, case: String) -> VerifyRow {
    VerifyRow { section: section.into(), case, printed: None, oracle: None, abs_err: None, verdict: NOT_CONVERGED.into() }
}

fn model_tag(m: &HartmannModel) -> String {
    format!("eta={} sigma={} q={}", m.eta, m.sigma, m.q)
}

fn element_row(section: &str, tag: &str, e: &MatrixElement) -> VerifyRow {
    let (s, t) = e.observable.powers();
    let case = format!("{tag} {} {} s={s} t={t}", e.bra.label(), e.ket.label());
    row(section, case, e.closed_form, e.oracle.value, e.oracle.converged)
}

/// Runs one job; divergent or out-of-domain cases produce no rows, an
/// unconverged quadrature produces a marked row.
fn run_job(job: &VerifyJob, spec: &QuadratureSpec) -> Result<Vec<VerifyRow>> {
    let out = match *job {
        VerifyJob::Identity(alpha, form) => {
            let r = mixed_order_worst_residual(alpha, 8, form);
            let name = match form {
                MixedOrderForm::AsPrinted => "printed",
                MixedOrderForm::Standard => "standard",
            };
            let verdict = if r <= 1e-12 { Verdict::Match } else { Verdict::Mismatch };
            vec![VerifyRow {
                section: "gegenbauer_mixed_order".into(),
                case: format!("alpha={alpha} form={name}"),
                printed: Some(r),
                oracle: Some(0.0),
                abs_err: Some(r),
                verdict: verdict.as_str().into(),
            }]
        }
        VerifyJob::RadialDiagonal(s, p) => skip_divergent(radial_diagonal_element(&s, p, spec))?
            .map(|e| element_row("radial_diagonal", &tag_of(&s), &e))
            .into_iter()
            .collect(),
        VerifyJob::RadialGeneral(a, b, p) => skip_divergent(radial_element(&a, &b, p, spec))?
            .map(|e| element_row("radial_general", &tag_of(&a), &e))
            .into_iter()
            .collect(),
        VerifyJob::AngularDiagonal(s, t) => skip_divergent(angular_diagonal_element(&s, t, spec))?
            .map(|e| element_row("angular_diagonal_5f4", &tag_of(&s), &e))
            .into_iter()
            .collect(),
        VerifyJob::AngularOff(n1, n2, k, t) | VerifyJob::Parity(n1, n2, k, t) => {
            let section = if matches!(job, VerifyJob::Parity(..)) { "angular_parity_zero" } else { "angular_offdiagonal" };
            let Some(cf) = skip_divergent(angular_offdiagonal_nk(n1, k, n2, k, t))? else { return Ok(vec![]) };
            let o = angular_oracle_nk(n1, k, n2, k, t, spec)?;
            vec![row(section, format!("n1={n1} n2={n2} k={k} t={t}"), cf, o.value, o.converged)]
        }
        VerifyJob::RadialRecurrence(model, state) => {
            let table = match build_table(&model, &state, -4, 2, 0, spec) {
                Ok(t) => t,
                Err(Error::NonConvergence(m)) => {
                    return Ok(vec![not_converged_row(
                        "radial_recurrence_validated",
                        format!("{} {} ({m})", model_tag(&model), state.label()),
                    )])
                }
                Err(e) => return Err(e),
            };
            let tag = format!("{} {}", model_tag(&model), state.label());
            let mut rows = Vec::new();
            for c in &table.radial {
                let Some(o) = c.oracle else { continue };
                if c.s != 0 {
                    rows.push(row("radial_recurrence_validated", format!("{tag} s={}", c.s), c.validated_value, o, true));
                }
                if !(-2..=0).contains(&c.s) {
                    rows.push(row("radial_recurrence_printed", format!("{tag} s={}", c.s), c.printed_value, o, true));
                }
            }
            rows
        }
        VerifyJob::Seed(n, k, t) => {
            let section = if n == 0 { "angular_seed_n0" } else { "angular_seed_n1" };
            let printed = crate::matel::closed(angular_seed(n, k, t))?;
            match sin_power_oracle(n, k, t, spec) {
                Ok(o) => vec![row(section, format!("n={n} k={k} t={t}"), printed, o, true)],
                Err(Error::NonConvergence(_)) => vec![not_converged_row(section, format!("n={n} k={k} t={t}"))],
                Err(e) => return Err(e),
            }
        }
        VerifyJob::AngularRecurrence(n, k, t) => {
            let case = format!("n={n} k={k} t={t}");
            let oracle = |n: u32, k: f64, t: i32| sin_power_oracle(n, k, t, spec);
            let parents = || -> Result<(AngularParents, f64)> {
                let p = AngularParents {
                    same: Some(oracle(n, k, t - 1)?),
                    shifted_next: Some(oracle(n - 1, k + 1.0, t)?),
                    shifted: Some(oracle(n - 1, k + 1.0, t - 1)?),
                    lower: Some(oracle(n - 1, k, t - 1)?),
                };
                Ok((p, oracle(n, k, t)?))
            };
            match parents() {
                Ok((p, o)) => {
                    let printed = crate::matel::closed(angular_recurrence_step(n, k, t - 1, p))?;
                    vec![row("angular_recurrence", case, printed, o, true)]
                }
                Err(Error::NonConvergence(_)) => vec![not_converged_row("angular_recurrence", case)],
                Err(e) => return Err(e),
            }
        }
        VerifyJob::Splitting(model) => {
            let cf = splitting_closed_form(&model)?;
            let mut rows = Vec::new();
            for (triple, printed) in [((0, 1, 0), cf.p4_010), ((1, 0, 0), cf.p4_100)] {
                let s = model.state(triple.0, triple.1, triple.2)?;
                let numeric = p4_element(&model, &s, &s, spec)?;
                rows.push(row("splitting_closed_form", format!("{} {} <p^4>", model_tag(&model), s.label()), printed, numeric, true));
            }
            rows
        }
        VerifyJob::DiagonalP4(model, s) => match p4_element(&model, &s, &s, spec) {
            Ok(numeric) => {
                let printed = printed_diagonal_p4(&model, &s)?;
                vec![row("diagonal_p4", format!("{} {} <p^4>", model_tag(&model), s.label()), printed, numeric, true)]
            }
            Err(Error::FirstOrderInvalid(_) | Error::Divergent(_)) => vec![],
            Err(Error::NonConvergence(_)) => {
                vec![not_converged_row("diagonal_p4", format!("{} {} <p^4>", model_tag(&model), s.label()))]
            }
            Err(e) => return Err(e),
        },
    };
    Ok(out)
}

fn tag_of(s: &QuantumState) -> String {
    format!("k={} l={}", s.k, s.l)
}

/// Models checked by `verify`: fixed reference points plus the configured one.
pub fn verify_models(config: &RunConfig) -> Result<Vec<HartmannModel>> {
    let mut models = vec![
        HartmannModel::hydrogenic(1.0),
        HartmannModel::hydrogenic(2.0),
        HartmannModel::atomic(1.0, 1.0, 2.0),
        HartmannModel::atomic(1.0, 1.0, 8.0),
    ];
    let own = config.model()?;
    if !models.contains(&own) {
        models.push(own);
    }
    Ok(models)
}

/// The k grid of the angular sections.
pub const K_GRID: [f64; 5] = [0.0, 0.5, 1.0, std::f64::consts::SQRT_2, 2.3];

fn verify_jobs(config: &RunConfig) -> Result<Vec<VerifyJob>> {
    let mut jobs = Vec::new();
    for alpha in [0.5, 1.3, 2.0] {
        for form in [MixedOrderForm::AsPrinted, MixedOrderForm::Standard] {
            jobs.push(VerifyJob::Identity(alpha, form));
        }
    }
    let models = verify_models(config)?;
    let own = config.model()?;
    let states_of = |m: &HartmannModel| -> Vec<QuantumState> {
        let (level, mm) = if *m == own { (config.max_level, config.max_m) } else { (2, 2) };
        m.scan(level, mm).into_iter().filter(|s| s.m >= 0).collect()
    };
    for model in &models {
        let states = states_of(model);
        for (i, a) in states.iter().enumerate() {
            for s in -4..=-1 {
                jobs.push(VerifyJob::RadialDiagonal(*a, s));
            }
            for b in states[i + 1..].iter().filter(|b| b.m == a.m) {
                for s in -4..=-1 {
                    jobs.push(VerifyJob::RadialGeneral(*a, *b, s));
                }
            }
            for t in 1..=2 {
                jobs.push(VerifyJob::AngularDiagonal(*a, t));
            }
        }
    }
    for k in K_GRID {
        for n1 in 0..=3 {
            for n2 in (n1..=3).filter(|n2| (n1 + n2) % 2 == 0) {
                for t in 1..=2 {
                    jobs.push(VerifyJob::AngularOff(n1, n2, k, t));
                }
            }
        }
        for n1 in 0..=5u32 {
            for n2 in (0..=5u32).filter(|n2| (n1 + n2) % 2 == 1) {
                jobs.push(VerifyJob::Parity(n1, n2, k, 0));
                jobs.push(VerifyJob::Parity(n1, n2, k, 1));
            }
        }
    }
    for model in &models {
        for s in states_of(model) {
            jobs.push(VerifyJob::RadialRecurrence(*model, s));
        }
    }
    for n in 0..=1 {
        for k in K_GRID {
            for t in 1..=3 {
                jobs.push(VerifyJob::Seed(n, k, t));
            }
        }
    }
    for n in 1..=4 {
        for k in K_GRID.iter().skip(1) {
            for t in 1..=3 {
                jobs.push(VerifyJob::AngularRecurrence(n, *k, t));
            }
        }
    }
    for model in &models {
        if model.k0().is_ok_and(|k| k > 1.0) {
            jobs.push(VerifyJob::Splitting(*model));
        }
        for s in states_of(model) {
            jobs.push(VerifyJob::DiagonalP4(*model, s));
        }
    }
    Ok(jobs)
}

fn summarize(rows: &[VerifyRow]) -> Vec<SectionSummary> {
    SECTIONS
        .iter()
        .map(|(name, description)| {
            let mine: Vec<&VerifyRow> = rows.iter().filter(|r| r.section == *name).collect();
            let count = |v: &str| mine.iter().filter(|r| r.verdict == v).count();
            let worst_abs = mine.iter().filter_map(|r| r.abs_err).fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.max(e))));
            let worst_rel = mine
                .iter()
                .filter_map(|r| Some(r.abs_err? / r.oracle?.abs().max(1e-300)))
                .filter(|r| r.is_finite())
                .fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.max(e))));
            SectionSummary {
                section: name.to_string(),
                description: description.to_string(),
                cases: mine.len(),
                matched: count(Verdict::Match.as_str()),
                mismatched: count(Verdict::Mismatch.as_str()),
                unavailable: count(Verdict::ClosedFormUnavailable.as_str()),
                not_converged: count(NOT_CONVERGED),
                worst_abs_err: worst_abs,
                worst_rel_err: worst_rel,
            }
        })
        .collect()
}

pub fn verify(config: &RunConfig, exec: Execution) -> Result<VerifyReport> {
    let spec = config.quadrature()?;
    let jobs = verify_jobs(config)?;
    let results = exec.map(&jobs, |job| run_job(job, &spec));
    let rows: Vec<VerifyRow> = results.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    let notes = vec![
        "a mismatch is a finding about a printed formula, not a failure of this tool".to_string(),
        format!("match means |printed - oracle| <= max(1e-9, 1e-8 |oracle|); the identity section uses residual <= 1e-12"),
        crate::recurrence::FREE_K_NOTE.to_string(),
    ];
    Ok(VerifyReport { summary: summarize(&rows), rows, notes })
}

impl Report for VerifyReport {
    fn write_csv(&self, out: &mut dyn Write, display: bool) -> Result<()> {
        for n in &self.notes {
            write_comment(out, n)?;
        }
        write_comment(out, "summary")?;
        write_table(
            out,
            &["section", "cases", "match", "mismatch", "closed_form_unavailable", "oracle_not_converged", "worst_abs_err", "worst_rel_err", "description"],
            self.summary.iter().map(|s| {
                vec![
                    s.section.clone(),
                    s.cases.to_string(),
                    s.matched.to_string(),
                    s.mismatched.to_string(),
                    s.unavailable.to_string(),
                    s.not_converged.to_string(),
                    fmt_opt(s.worst_abs_err, display),
                    fmt_opt(s.worst_rel_err, display),
                    s.description.clone(),
                ]
            }),
        )?;
        write_comment(out, "cases")?;
        write_table(
            out,
            &["section", "case", "printed", "oracle", "abs_err", "verdict"],
            self.rows.iter().map(|r| {
                vec![
                    r.section.clone(),
                    r.case.clone(),
                    fmt_opt(r.printed, display),
                    fmt_opt(r.oracle, display),
                    fmt_opt(r.abs_err, display),
                    r.verdict.clone(),
                ]
            }),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::parse(text, Vec::new()).unwrap()
    }

    #[test]
    fn spectrum_hydrogen() {
        let r = spectrum(&cfg("max_level = 2\nmax_m = 2\n")).unwrap();
        assert_eq!(r.rows[0].e0, -0.5);
        assert_eq!(r.rows[0].group, 0);
        let second: Vec<_> = r.rows.iter().filter(|x| x.group == 1).collect();
        assert!(second.iter().all(|x| x.e0 == -0.125));
        assert_eq!(second.len(), 4);
        let r0 = spectrum(&cfg("max_level = 0\nmax_m = 0\n")).unwrap();
        assert_eq!(r0.rows.len(), 1);
    }

    #[test]
    fn splitting_beta_zero_is_zero() {
        let r = splitting(&cfg("max_level = 1\nmax_m = 0\n"), Execution::Sequential).unwrap();
        assert!(r.rows.iter().all(|x| x.de_numeric == Some(0.0)));
        assert!(r.levels.iter().all(|l| l.status != LevelStatus::Lifted));
    }

    #[test]
    fn splitting_hydrogen_n2_splits() {
        let r = splitting(&cfg("beta = 1e-4\nmax_level = 1\nmax_m = 0\n"), Execution::Sequential).unwrap();
        let level = r.levels.iter().find(|l| l.e0 == -0.125).unwrap();
        assert_eq!(level.status, LevelStatus::Lifted);
        assert!(r.closed_form.is_none() && r.closed_form_error.is_some());
    }

    #[test]
    fn splitting_ring_flags_invalid_sector() {
        let r = splitting(&cfg("q = 0.5\nbeta = 1e-4\nmax_level = 1\nmax_m = 2\n"), Execution::Sequential).unwrap();
        assert!(r.rows.iter().any(|x| x.m == 0 && x.validity_flags == "first_order_invalid" && x.de_numeric.is_none()));
        assert!(r.rows.iter().any(|x| x.m == 2 && x.de_numeric.is_some_and(|d| d > 0.0)));
    }

    #[test]
    fn splitting_k0_two_has_printed_rows() {
        let r = splitting(&cfg("q = 8.0\nbeta = 1e-4\nmax_level = 1\nmax_m = 0\n"), Execution::Parallel).unwrap();
        let printed: Vec<_> = r.rows.iter().filter(|x| x.verdict.is_some()).collect();
        assert_eq!(printed.len(), 2);
        let level = r.levels.iter().find(|l| l.states == 2).unwrap();
        assert_eq!(level.status, LevelStatus::Lifted);
    }

    #[test]
    fn csv_float_format() {
        assert_eq!(fmt_float(0.1, false), "1.0000000000000001e-1");
        assert_eq!(fmt_float(-0.125, true), "-1.25000e-1");
    }

    #[test]
    fn distinct() {
        assert_eq!(distinct_count(&[1.0, 1.0 + 1e-14, 2.0]), 2);
        assert_eq!(distinct_count(&[0.0, 0.0]), 1);
        assert_eq!(distinct_count(&[]), 0);
    }
}

use serde::{Deserialize, Serialize};

use super::{Baseline, Kpis, MeanVector, ValueTypeSpec};
use crate::mabs::{PolicyIndices, PolicyParams};
use crate::survey::RegressionModel;
use crate::sweep::CandidateSet;
use crate::{Error, Result};

/// Product of the modifier factors acting on `variable`.
fn factor(spec: &ValueTypeSpec, kpis: &Kpis, baseline: &Baseline, variable: &str) -> Result<f64> {
    spec.modifiers_for(variable)
        .iter()
        .try_fold(1.0, |acc, m| Ok(acc * m.factor(kpis, baseline, spec.s_elec)?))
}

/// `χ = x · Π factors`; a variable without modifiers passes through.
pub fn chi(x: f64, spec: &ValueTypeSpec, kpis: &Kpis, baseline: &Baseline, variable: &str) -> Result<f64> {
    Ok(x * factor(spec, kpis, baseline, variable)?)
}

fn check_alignment(model: &RegressionModel, means: &MeanVector, spec: &ValueTypeSpec) -> Result<()> {
    let ids = model.ids();
    if means.ids() != ids {
        return Err(Error::Domain(format!(
            "mean vector ids {:?} do not match model ids {:?}",
            means.ids(),
            ids
        )));
    }
    spec.validate()?;
    spec.check_variables(&ids)
}

fn psi_unchecked(
    model: &RegressionModel,
    means: &MeanVector,
    spec: &ValueTypeSpec,
    kpis: &Kpis,
    baseline: &Baseline,
) -> Result<f64> {
    model
        .coefficients
        .iter()
        .zip(&means.entries)
        .try_fold(model.intercept.beta, |acc, (c, m)| {
            Ok(acc + c.beta * chi(m.value, spec, kpis, baseline, &c.id)?)
        })
}

/// Coupled well-being `ψ = β₀ + Σ βᵢ χᵢ` for one candidate's KPIs.
pub fn evaluate_psi(
    model: &RegressionModel,
    means: &MeanVector,
    spec: &ValueTypeSpec,
    kpis: &Kpis,
    baseline: &Baseline,
) -> Result<f64> {
    check_alignment(model, means, spec)?;
    baseline.validate()?;
    psi_unchecked(model, means, spec, kpis, baseline)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiRecord {
    pub id: String,
    pub beta: f64,
    pub mean: f64,
    pub factor: f64,
    pub chi: f64,
    pub anchored: bool,
}

/// Outcome of selecting the best candidate for one value type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingResult {
    pub value_type: ValueTypeSpec,
    pub k_opt: usize,
    pub psi_opt: f64,
    /// ψ with every modifier at baseline, i.e. the plain prediction.
    pub psi_baseline: f64,
    /// Set when ψ_opt falls outside [0, 1]; reported, not clamped.
    pub psi_out_of_range: bool,
    pub params: PolicyParams,
    pub indices: PolicyIndices,
    pub chi: Vec<ChiRecord>,
    pub baseline: Baseline,
    pub mean_source: String,
    /// ψ for every candidate, indexed by `k − 1`.
    #[serde(skip)]
    pub psi: Vec<f64>,
}

impl CouplingResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("coupling result serializes") + "\n"
    }
}

/// Argmax of ψ over the candidates; ties go to the smallest `k`.
pub fn select_optimal(
    set: &CandidateSet,
    model: &RegressionModel,
    means: &MeanVector,
    spec: &ValueTypeSpec,
    baseline: &Baseline,
) -> Result<CouplingResult> {
    if set.is_empty() {
        return Err(Error::Domain("cannot select from an empty candidate set".into()));
    }
    check_alignment(model, means, spec)?;
    baseline.validate()?;
    let psi = set
        .candidates
        .iter()
        .map(|c| {
            psi_unchecked(model, means, spec, &Kpis::from(&c.indices), baseline).map_err(|e| Error::Candidate {
                k: c.params.k,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, v) in psi.iter().enumerate().skip(1) {
        if *v > psi[best] {
            best = i;
        }
    }
    let winner = &set.candidates[best];
    let kpis = Kpis::from(&winner.indices);
    let chi_audit = model
        .coefficients
        .iter()
        .zip(&means.entries)
        .map(|(c, m)| {
            let f = factor(spec, &kpis, baseline, &c.id)?;
            Ok(ChiRecord {
                id: c.id.clone(),
                beta: c.beta,
                mean: m.value,
                factor: f,
                chi: m.value * f,
                anchored: m.anchored,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let psi_opt = psi[best];
    Ok(CouplingResult {
        value_type: spec.clone(),
        k_opt: winner.params.k,
        psi_opt,
        psi_baseline: psi_unchecked(model, means, spec, &baseline.as_kpis(), baseline)?,
        psi_out_of_range: !(0.0..=1.0).contains(&psi_opt),
        params: winner.params,
        indices: winner.indices,
        chi: chi_audit,
        baseline: *baseline,
        mean_source: means.source.clone(),
        psi,
    })
}

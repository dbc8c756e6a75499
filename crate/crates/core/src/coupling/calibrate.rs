//! Recovering unknown respondent means from published ψ differences.
//!
//! With every modifier at baseline ψ reduces to the plain prediction, so the
//! gain of a candidate over the baseline is
//! `Δψ = Σ βᵢ · x_iav · (Fᵢ − 1)`, where `Fᵢ` is the product of the
//! modifiers acting on variable `i`. That is linear in every mean, so one
//! published Δψ pins one unknown mean.

use serde::{Deserialize, Serialize};

use super::{Baseline, Kpis, MeanVector, ValueTypeSpec};
use crate::survey::RegressionModel;
use crate::{Error, Result};

/// `Δψ = constant + Σ coefficient · x_iav` over the listed unknowns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearForm {
    pub constant: f64,
    pub coefficients: Vec<(String, f64)>,
}

impl LinearForm {
    pub fn coefficient(&self, id: &str) -> Option<f64> {
        self.coefficients.iter().find(|(k, _)| k == id).map(|(_, v)| *v)
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .zip(values)
            .fold(self.constant, |acc, ((_, c), v)| acc + c * v)
    }
}

/// Δψ of `kpis` over the baseline as a linear function of the means named in
/// `unknowns`; every other mean is read from `means`.
pub fn delta_linear_form(
    model: &RegressionModel,
    means: &MeanVector,
    spec: &ValueTypeSpec,
    kpis: &Kpis,
    baseline: &Baseline,
    unknowns: &[&str],
) -> Result<LinearForm> {
    baseline.validate()?;
    spec.validate()?;
    let ids = model.ids();
    spec.check_variables(&ids)?;
    if let Some(u) = unknowns.iter().find(|u| !ids.iter().any(|i| i == *u)) {
        return Err(Error::Domain(format!("unknown '{u}' is not a model variable")));
    }
    let mut constant = 0.0;
    let mut coefficients: Vec<(String, f64)> = unknowns.iter().map(|u| (u.to_string(), 0.0)).collect();
    for c in &model.coefficients {
        let f = spec.modifiers_for(&c.id).iter().try_fold(1.0, |acc, m| {
            Ok::<_, Error>(acc * m.factor(kpis, baseline, spec.s_elec)?)
        })?;
        let slope = c.beta * (f - 1.0);
        if let Some(slot) = coefficients.iter_mut().find(|(id, _)| *id == c.id) {
            slot.1 = slope;
        } else {
            let x = means
                .get(&c.id)
                .ok_or_else(|| Error::Domain(format!("no mean for '{}'", c.id)))?;
            constant += slope * x;
        }
    }
    Ok(LinearForm { constant, coefficients })
}

/// The value of mean `variable` that makes the candidate's Δψ over the
/// baseline equal `target_delta`.
pub fn solve_mean_for_delta(
    model: &RegressionModel,
    means: &MeanVector,
    spec: &ValueTypeSpec,
    kpis: &Kpis,
    baseline: &Baseline,
    variable: &str,
    target_delta: f64,
) -> Result<f64> {
    let form = delta_linear_form(model, means, spec, kpis, baseline, &[variable])?;
    let slope = form.coefficients[0].1;
    if slope == 0.0 {
        return Err(Error::Domain(format!(
            "Δψ does not depend on '{variable}' under value type {}",
            spec.name
        )));
    }
    Ok((target_delta - form.constant) / slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{evaluate_psi, preset};
    use crate::fixtures::{calibrated_means, reference_model, REFERENCE_BASELINE};

    fn gain(means: &MeanVector, spec: &ValueTypeSpec, kpis: &Kpis) -> f64 {
        let model = reference_model();
        evaluate_psi(&model, means, spec, kpis, &REFERENCE_BASELINE).unwrap()
            - evaluate_psi(&model, means, spec, &REFERENCE_BASELINE.as_kpis(), &REFERENCE_BASELINE).unwrap()
    }

    #[test]
    fn linear_form_matches_direct_evaluation() {
        let means = calibrated_means();
        let spec = preset("C").unwrap();
        let kpis = Kpis { p: 6e6, u: 0.7, d: 0.4 };
        let form = delta_linear_form(
            &reference_model(),
            &means,
            &spec,
            &kpis,
            &REFERENCE_BASELINE,
            &["x3", "x4"],
        )
        .unwrap();
        let (x3, x4) = (means.get("x3").unwrap(), means.get("x4").unwrap());
        assert!((form.eval(&[x3, x4]) - gain(&means, &spec, &kpis)).abs() < 1e-14);
    }

    #[test]
    fn solving_then_evaluating_round_trips() {
        let mut means = calibrated_means();
        let spec = preset("A").unwrap();
        let kpis = Kpis { p: 3e6, u: 0.0, d: 0.0 };
        let x8 = solve_mean_for_delta(
            &reference_model(),
            &means,
            &spec,
            &kpis,
            &REFERENCE_BASELINE,
            "x8",
            0.002,
        )
        .unwrap();
        means.set("x8", x8, true).unwrap();
        assert!((gain(&means, &spec, &kpis) - 0.002).abs() < 1e-15);
    }

    #[test]
    fn unmodified_variable_is_not_identifiable() {
        let spec = preset("A").unwrap();
        let kpis = Kpis { p: 3e6, u: 0.5, d: 0.5 };
        let r = solve_mean_for_delta(
            &reference_model(),
            &calibrated_means(),
            &spec,
            &kpis,
            &REFERENCE_BASELINE,
            "x1",
            0.01,
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}

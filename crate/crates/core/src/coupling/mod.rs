//! Coupling of simulated KPIs into the well-being regression.
//!
//! Each explanatory variable `xᵢ` may carry zero or more multiplicative
//! modifiers driven by a candidate's cost `p`, renewable utilization `u` and
//! regional circulation `d`, relative to the no-renewables baseline
//! `(p₀, u₀, d₀)`:
//!
//! - cost: `1 / ((1 − s) + s·p/p₀)`, with `s` the electricity share of
//!   household expenses
//! - renewable: `(1 + u) / (1 + u₀)`
//! - circulation: `(1 + d) / (1 + d₀)`
//!
//! The modified variable is `χᵢ = xᵢ · Π factors`, and the coupled target is
//! `ψ = β₀ + Σ βᵢ χᵢ` evaluated at the respondent means. The selected policy
//! is the candidate with the largest ψ.
//!
//! Modifiers apply to a variable regardless of the sign of its coefficient,
//! so a renewable modifier on a negatively weighted variable lowers ψ as `u`
//! grows.

mod calibrate;
mod modifiers;
mod psi;
mod value_type;

use serde::{Deserialize, Serialize};

use crate::mabs::PolicyIndices;
use crate::{Error, Result};

pub use calibrate::{delta_linear_form, solve_mean_for_delta, LinearForm};
pub use modifiers::{circulation_modifier, cost_modifier, renewable_modifier};
pub use psi::{chi, evaluate_psi, select_optimal, ChiRecord, CouplingResult};
pub use value_type::{builtin_presets, preset, Modifier, ValueTypeSpec, DEFAULT_ELECTRICITY_SHARE};

/// Status-quo KPIs before any renewables are installed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Baseline {
    pub p0: f64,
    pub u0: f64,
    pub d0: f64,
}

impl Baseline {
    pub fn validate(&self) -> Result<()> {
        if !(self.p0 > 0.0) || !self.p0.is_finite() {
            return Err(Error::Domain(format!("baseline p0 = {} must be positive", self.p0)));
        }
        for (name, v) in [("u0", self.u0), ("d0", self.d0)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("baseline {name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn from_indices(idx: &PolicyIndices) -> Self {
        Self {
            p0: idx.cost_p,
            u0: idx.utilization_u,
            d0: idx.circulation_d,
        }
    }

    pub fn as_kpis(&self) -> Kpis {
        Kpis {
            p: self.p0,
            u: self.u0,
            d: self.d0,
        }
    }
}

/// The three KPIs a modifier can read.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kpis {
    pub p: f64,
    pub u: f64,
    pub d: f64,
}

impl From<&PolicyIndices> for Kpis {
    fn from(idx: &PolicyIndices) -> Self {
        Self {
            p: idx.cost_p,
            u: idx.utilization_u,
            d: idx.circulation_d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanEntry {
    pub id: String,
    pub value: f64,
    /// False when the value is a placeholder rather than observed or
    /// calibrated.
    pub anchored: bool,
}

/// Mean response `x_iav` per explanatory variable, in model order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanVector {
    pub source: String,
    pub entries: Vec<MeanEntry>,
}

impl MeanVector {
    pub fn new(source: &str, ids: &[String], values: &[f64]) -> Result<Self> {
        if ids.len() != values.len() {
            return Err(Error::Domain(format!(
                "{} ids but {} mean values",
                ids.len(),
                values.len()
            )));
        }
        let mv = Self {
            source: source.to_string(),
            entries: ids
                .iter()
                .zip(values)
                .map(|(id, &value)| MeanEntry {
                    id: id.clone(),
                    value,
                    anchored: true,
                })
                .collect(),
        };
        mv.validate()?;
        Ok(mv)
    }

    pub fn validate(&self) -> Result<()> {
        match self.entries.iter().find(|e| !(0.0..=1.0).contains(&e.value)) {
            Some(e) => Err(Error::Domain(format!(
                "mean of '{}' = {} outside [0, 1]",
                e.id, e.value
            ))),
            None => Ok(()),
        }
    }

    pub fn ids(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.id.clone()).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.id == id).map(|e| e.value)
    }

    pub fn set(&mut self, id: &str, value: f64, anchored: bool) -> Result<()> {
        let e = self
            .entries
            .iter_mut()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::Domain(format!("no mean for '{id}'")))?;
        e.value = value;
        e.anchored = anchored;
        Ok(())
    }
}

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::modifiers::{circulation_modifier, cost_modifier, renewable_modifier};
use super::{Baseline, Kpis};
use crate::{Error, Result};

/// Share of household expenses spent on electricity.
pub const DEFAULT_ELECTRICITY_SHARE: f64 = 0.037;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modifier {
    Cost,
    Renewable,
    Circulation,
}

impl Modifier {
    pub fn factor(self, kpis: &Kpis, baseline: &Baseline, s_elec: f64) -> Result<f64> {
        match self {
            Modifier::Cost => cost_modifier(kpis.p, baseline.p0, s_elec),
            Modifier::Renewable => renewable_modifier(kpis.u, baseline.u0),
            Modifier::Circulation => circulation_modifier(kpis.d, baseline.d0),
        }
    }
}

impl FromStr for Modifier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cost" => Ok(Modifier::Cost),
            "renewable" => Ok(Modifier::Renewable),
            "circulation" => Ok(Modifier::Circulation),
            _ => Err(Error::Config(format!(
                "unknown modifier '{s}' (expected cost, renewable or circulation)"
            ))),
        }
    }
}

impl fmt::Display for Modifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modifier::Cost => "cost",
            Modifier::Renewable => "renewable",
            Modifier::Circulation => "circulation",
        })
    }
}

/// A resident value type: which KPI modifiers act on which explanatory
/// variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueTypeSpec {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub modifiers: BTreeMap<String, Vec<Modifier>>,
    #[serde(default = "default_share")]
    pub s_elec: f64,
}

fn default_share() -> f64 {
    DEFAULT_ELECTRICITY_SHARE
}

impl ValueTypeSpec {
    pub fn new(name: &str, assignments: &[(&str, &[Modifier])]) -> Self {
        Self {
            name: name.to_string(),
            modifiers: assignments
                .iter()
                .map(|(id, mods)| (id.to_string(), mods.to_vec()))
                .collect(),
            s_elec: DEFAULT_ELECTRICITY_SHARE,
        }
    }

    pub fn s_other(&self) -> f64 {
        1.0 - self.s_elec
    }

    pub fn modifiers_for(&self, id: &str) -> &[Modifier] {
        self.modifiers.get(id).map_or(&[], Vec::as_slice)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s_elec > 0.0 && self.s_elec < 1.0) {
            return Err(Error::Config(format!(
                "value type {}: s_elec {} outside (0, 1)",
                self.name, self.s_elec
            )));
        }
        Ok(())
    }

    /// Checks that every modified variable exists among `ids`.
    pub fn check_variables(&self, ids: &[String]) -> Result<()> {
        match self.modifiers.keys().find(|k| !ids.contains(k)) {
            Some(k) => Err(Error::Domain(format!(
                "value type {}: variable '{k}' is not in the model",
                self.name
            ))),
            None => Ok(()),
        }
    }
}

/// The three reference value types.
///
/// - A: higher electricity cost lowers economic affluence (`x8`).
/// - B: as A, plus pride in renewables (`x6`) and regional circulation
///   enriching the economy (`x8`).
/// - C: as B, plus trust in district residents rising with renewables and
///   circulation (`x3`) and attachment to the district falling with
///   renewables (`x4`).
pub fn builtin_presets() -> Vec<ValueTypeSpec> {
    use Modifier::*;
    vec![
        ValueTypeSpec::new("A", &[("x8", &[Cost])]),
        ValueTypeSpec::new("B", &[("x6", &[Renewable]), ("x8", &[Circulation, Cost])]),
        ValueTypeSpec::new(
            "C",
            &[
                ("x3", &[Circulation, Renewable]),
                ("x4", &[Renewable]),
                ("x6", &[Renewable]),
                ("x8", &[Circulation, Cost]),
            ],
        ),
    ]
}

pub fn preset(name: &str) -> Option<ValueTypeSpec> {
    builtin_presets().into_iter().find(|p| p.name == name)
}

//! Hourly multi-agent microgrid model: PV and nano-hydro generators, a
//! battery, the grid supplier and the resident consumer.

mod dispatch;
mod simulate;

use serde::{Deserialize, Serialize};

use crate::sensor::{DemandProfile, GenerationProfile};

pub use dispatch::{dispatch_hour, HourFlows, HourlyState, Tallies};
pub use simulate::{
    annual_cost, circulation_rate, hourly_generation, simulate_year, simulate_year_traced, utilization_rate,
    CostBreakdown, PolicyIndices,
};

/// Facility sizing for one candidate policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    /// Candidate index, 1-based.
    pub k: usize,
    pub pv_kw: f64,
    pub hydro_m: f64,
    pub battery_kwh: f64,
}

impl PolicyParams {
    pub fn new(k: usize, pv_kw: f64, hydro_m: f64, battery_kwh: f64) -> Self {
        Self {
            k,
            pv_kw,
            hydro_m,
            battery_kwh,
        }
    }

    /// The no-renewables status quo.
    pub fn none() -> Self {
        Self::new(0, 0.0, 0.0, 0.0)
    }

    pub fn validate(&self) -> crate::Result<()> {
        for (name, v) in [
            ("pv_kw", self.pv_kw),
            ("hydro_m", self.hydro_m),
            ("battery_kwh", self.battery_kwh),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(crate::Error::Domain(format!(
                    "{name} = {v} must be finite and nonnegative"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacilityCost {
    /// ¥ per unit of size (kW, m of drop or kWh).
    pub unit_cost: f64,
    pub life_years: f64,
}

impl FacilityCost {
    pub fn annualized(&self, size: f64) -> crate::Result<f64> {
        if !(self.life_years > 0.0) {
            return Err(crate::Error::Domain(format!(
                "service life {} must be positive",
                self.life_years
            )));
        }
        Ok(self.unit_cost * size / self.life_years)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryConfig {
    pub unit_cost: f64,
    pub life_years: f64,
    /// Round-trip efficiency, applied when discharging.
    pub efficiency: f64,
}

/// Which spend components stay inside the region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalFlags {
    pub pv: bool,
    pub hydro: bool,
    pub battery: bool,
    pub consignment: bool,
}

impl Default for LocalFlags {
    fn default() -> Self {
        Self {
            pv: true,
            hydro: true,
            battery: true,
            consignment: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub pv: FacilityCost,
    pub hydro: FacilityCost,
    pub battery: BatteryConfig,
    /// ¥/kWh paid to the power company.
    pub grid_tariff: f64,
    /// Low-voltage consignment charge, ¥ per locally delivered kWh.
    #[serde(default)]
    pub consignment_charge: f64,
    #[serde(default)]
    pub local: LocalFlags,
}

impl AgentConfig {
    /// Range violations as `(key, message)` pairs; empty when valid.
    pub fn diagnostics(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut nonneg = |key: &str, v: f64| {
            if !(v >= 0.0) || !v.is_finite() {
                out.push((key.to_string(), format!("{v} must be finite and >= 0")));
            }
        };
        nonneg("pv.unit_cost", self.pv.unit_cost);
        nonneg("hydro.unit_cost", self.hydro.unit_cost);
        nonneg("battery.unit_cost", self.battery.unit_cost);
        nonneg("grid_tariff", self.grid_tariff);
        nonneg("consignment_charge", self.consignment_charge);
        for (key, v) in [
            ("pv.life_years", self.pv.life_years),
            ("hydro.life_years", self.hydro.life_years),
            ("battery.life_years", self.battery.life_years),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                out.push((key.to_string(), format!("{v} must be > 0")));
            }
        }
        let eta = self.battery.efficiency;
        if !(eta > 0.0 && eta <= 1.0) {
            out.push(("battery.efficiency".into(), format!("{eta} outside (0, 1]")));
        }
        out
    }
}

/// The hourly inputs shared by every candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Profiles {
    pub pv: GenerationProfile,
    pub hydro: GenerationProfile,
    pub demand: DemandProfile,
}

#[cfg(test)]
pub(crate) fn test_config(eta: f64) -> AgentConfig {
    let f = FacilityCost {
        unit_cost: 1.0,
        life_years: 1.0,
    };
    AgentConfig {
        pv: f,
        hydro: f,
        battery: BatteryConfig {
            unit_cost: 1.0,
            life_years: 1.0,
            efficiency: eta,
        },
        grid_tariff: 30.0,
        consignment_charge: 0.0,
        local: LocalFlags::default(),
    }
}

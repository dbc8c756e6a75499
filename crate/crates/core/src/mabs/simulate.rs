use serde::{Deserialize, Serialize};

use super::dispatch::{dispatch_hour, HourFlows, HourlyState};
use super::{AgentConfig, LocalFlags, PolicyParams, Profiles};
use crate::{Error, Result, HOURS_PER_YEAR};

/// Annual spend by component (¥/yr).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub grid: f64,
    pub pv: f64,
    pub hydro: f64,
    pub battery: f64,
    pub consignment: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.grid + self.pv + self.hydro + self.battery + self.consignment
    }

    pub fn in_region(&self, flags: &LocalFlags) -> f64 {
        [
            (flags.pv, self.pv),
            (flags.hydro, self.hydro),
            (flags.battery, self.battery),
            (flags.consignment, self.consignment),
        ]
        .iter()
        .filter(|(local, _)| *local)
        .map(|(_, v)| v)
        .sum()
    }
}

/// KPIs of one simulated policy year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyIndices {
    /// Resident burden, ¥/yr.
    pub cost_p: f64,
    pub utilization_u: f64,
    pub circulation_d: f64,
    /// ¥/yr paid for grid energy.
    pub grid_purchase: f64,
    pub annual_pv_kwh: f64,
    pub annual_hydro_kwh: f64,
    pub curtailed_kwh: f64,
    pub grid_import_kwh: f64,
    pub renewable_consumed_kwh: f64,
    pub demand_kwh: f64,
    pub costs: CostBreakdown,
}

/// Hourly renewable output for a sizing: `pv_kw·pv[h] + hydro_m·hydro[h]`.
pub fn hourly_generation(params: &PolicyParams, profiles: &Profiles) -> Result<Vec<f64>> {
    check_lengths(profiles)?;
    Ok(profiles
        .pv
        .hourly
        .iter()
        .zip(&profiles.hydro.hourly)
        .map(|(p, h)| params.pv_kw * p + params.hydro_m * h)
        .collect())
}

fn check_lengths(profiles: &Profiles) -> Result<()> {
    for (name, len) in [
        ("pv", profiles.pv.hourly.len()),
        ("hydro", profiles.hydro.hourly.len()),
        ("demand", profiles.demand.hourly.len()),
    ] {
        if len != HOURS_PER_YEAR {
            return Err(Error::Domain(format!(
                "{name} profile has {len} hours, expected {HOURS_PER_YEAR}"
            )));
        }
    }
    Ok(())
}

/// Runs the hourly dispatch over the year and derives the KPIs.
pub fn simulate_year(params: &PolicyParams, profiles: &Profiles, config: &AgentConfig) -> Result<PolicyIndices> {
    run(params, profiles, config, |_| {})
}

/// As [`simulate_year`], also returning every hour's flows.
pub fn simulate_year_traced(
    params: &PolicyParams,
    profiles: &Profiles,
    config: &AgentConfig,
) -> Result<(PolicyIndices, Vec<HourFlows>)> {
    let mut trace = Vec::with_capacity(HOURS_PER_YEAR);
    let idx = run(params, profiles, config, |f| trace.push(*f))?;
    Ok((idx, trace))
}

fn run(
    params: &PolicyParams,
    profiles: &Profiles,
    config: &AgentConfig,
    mut observe: impl FnMut(&HourFlows),
) -> Result<PolicyIndices> {
    params.validate()?;
    check_lengths(profiles)?;
    let mut state = HourlyState::new(params.battery_kwh);
    let (mut pv_total, mut hydro_total) = (0.0, 0.0);
    for h in 0..HOURS_PER_YEAR {
        let pv = params.pv_kw * profiles.pv.hourly[h];
        let hydro = params.hydro_m * profiles.hydro.hourly[h];
        pv_total += pv;
        hydro_total += hydro;
        let flows = dispatch_hour(&mut state, pv + hydro, profiles.demand.hourly[h], config);
        observe(&flows);
    }
    let t = state.tallies;
    let renewable = t.renewable_consumed();
    let costs = annual_cost(params, t.grid_import, renewable, config)?;
    Ok(PolicyIndices {
        cost_p: costs.total(),
        utilization_u: utilization_rate(renewable, t.demand)?,
        circulation_d: circulation_rate(&costs, &config.local)?,
        grid_purchase: costs.grid,
        annual_pv_kwh: pv_total,
        annual_hydro_kwh: hydro_total,
        curtailed_kwh: t.curtailed,
        grid_import_kwh: t.grid_import,
        renewable_consumed_kwh: renewable,
        demand_kwh: t.demand,
        costs,
    })
}

/// Grid energy at the tariff, straight-line amortization of each installed
/// facility, and the consignment charge on locally delivered energy.
pub fn annual_cost(
    params: &PolicyParams,
    grid_import_kwh: f64,
    local_delivered_kwh: f64,
    config: &AgentConfig,
) -> Result<CostBreakdown> {
    Ok(CostBreakdown {
        grid: config.grid_tariff * grid_import_kwh,
        pv: config.pv.annualized(params.pv_kw)?,
        hydro: config.hydro.annualized(params.hydro_m)?,
        battery: crate::mabs::FacilityCost {
            unit_cost: config.battery.unit_cost,
            life_years: config.battery.life_years,
        }
        .annualized(params.battery_kwh)?,
        consignment: config.consignment_charge * local_delivered_kwh,
    })
}

/// Share of annual demand met by renewables, directly or via the battery.
pub fn utilization_rate(renewable_consumed_kwh: f64, total_demand_kwh: f64) -> Result<f64> {
    if !(total_demand_kwh > 0.0) {
        return Err(Error::Domain(format!(
            "annual demand {total_demand_kwh} must be positive"
        )));
    }
    Ok((renewable_consumed_kwh / total_demand_kwh).clamp(0.0, 1.0))
}

/// Share of the resident cost spent on in-region components.
pub fn circulation_rate(costs: &CostBreakdown, flags: &LocalFlags) -> Result<f64> {
    let total = costs.total();
    if !(total > 0.0) {
        return Err(Error::Domain(format!("total cost {total} must be positive")));
    }
    Ok((costs.in_region(flags) / total).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mabs::test_config;
    use crate::sensor::{DemandProfile, GenerationProfile, ProfileUnit};

    fn profiles(pv: f64, hydro: f64, demand: f64) -> Profiles {
        Profiles {
            pv: GenerationProfile::from_hourly(ProfileUnit::PerKw, vec![pv; HOURS_PER_YEAR]).unwrap(),
            hydro: GenerationProfile::from_hourly(ProfileUnit::PerMeterDrop, vec![hydro; HOURS_PER_YEAR]).unwrap(),
            demand: DemandProfile::from_hourly(vec![demand; HOURS_PER_YEAR]).unwrap(),
        }
    }

    #[test]
    fn status_quo_buys_everything() {
        let cfg = test_config(0.9);
        let idx = simulate_year(&PolicyParams::none(), &profiles(0.2, 3.0, 10.0), &cfg).unwrap();
        assert_eq!(idx.utilization_u, 0.0);
        assert_eq!(idx.circulation_d, 0.0);
        assert_eq!(idx.cost_p, cfg.grid_tariff * 10.0 * 8760.0);
        assert_eq!(idx.grid_purchase, idx.cost_p);
    }

    #[test]
    fn saturating_generation_gives_full_utilization() {
        let cfg = test_config(0.9);
        let idx = simulate_year(&PolicyParams::new(1, 0.0, 4.0, 0.0), &profiles(0.2, 3.0, 10.0), &cfg).unwrap();
        assert_eq!(idx.utilization_u, 1.0);
        assert_eq!(idx.grid_purchase, 0.0);
        assert_eq!(idx.curtailed_kwh, 2.0 * 8760.0);
    }

    #[test]
    fn zero_life_is_domain_error() {
        let mut cfg = test_config(0.9);
        cfg.pv.life_years = 0.0;
        assert!(matches!(
            annual_cost(&PolicyParams::none(), 1.0, 0.0, &cfg),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn cost_without_facilities_is_grid_only() {
        let cfg = test_config(0.9);
        let c = annual_cost(&PolicyParams::none(), 123.0, 0.0, &cfg).unwrap();
        assert_eq!(c.total(), 30.0 * 123.0);
    }

    #[test]
    fn amortization_is_linear_in_size() {
        let mut cfg = test_config(0.9);
        cfg.pv = crate::mabs::FacilityCost {
            unit_cost: 250_000.0,
            life_years: 20.0,
        };
        let a = annual_cost(&PolicyParams::new(1, 20.0, 2.0, 5.0), 0.0, 0.0, &cfg).unwrap();
        let b = annual_cost(&PolicyParams::new(1, 40.0, 4.0, 10.0), 0.0, 0.0, &cfg).unwrap();
        assert_eq!(b.total(), 2.0 * a.total());
    }

    #[test]
    fn utilization_ratios() {
        assert_eq!(utilization_rate(0.0, 100.0).unwrap(), 0.0);
        assert_eq!(utilization_rate(100.0, 100.0).unwrap(), 1.0);
        assert_eq!(utilization_rate(50.0, 100.0).unwrap(), 0.5);
        assert!(utilization_rate(1.0, 0.0).is_err());
    }

    #[test]
    fn circulation_ratios() {
        let flags = LocalFlags::default();
        let c = CostBreakdown {
            grid: 750.0,
            pv: 250.0,
            ..Default::default()
        };
        assert_eq!(circulation_rate(&c, &flags).unwrap(), 0.25);
        let all_local = CostBreakdown {
            pv: 1.0,
            hydro: 2.0,
            ..Default::default()
        };
        assert_eq!(circulation_rate(&all_local, &flags).unwrap(), 1.0);
        let none = LocalFlags {
            pv: false,
            hydro: false,
            battery: false,
            consignment: false,
        };
        assert_eq!(circulation_rate(&c, &none).unwrap(), 0.0);
        assert!(circulation_rate(&CostBreakdown::default(), &flags).is_err());
    }

    #[test]
    fn half_served_hour_by_hour() {
        let cfg = test_config(1.0);
        let idx = simulate_year(&PolicyParams::new(1, 25.0, 0.0, 0.0), &profiles(0.2, 0.0, 10.0), &cfg).unwrap();
        assert_eq!(idx.utilization_u, 0.5);
    }

    #[test]
    fn profile_length_mismatch() {
        let mut p = profiles(0.1, 0.1, 1.0);
        p.demand.hourly.pop();
        assert!(matches!(
            simulate_year(&PolicyParams::none(), &p, &test_config(0.9)),
            Err(Error::Domain(_))
        ));
    }
}

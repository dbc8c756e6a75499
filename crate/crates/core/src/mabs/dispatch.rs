use super::AgentConfig;

/// Battery state plus running energy tallies (kWh).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HourlyState {
    pub capacity: f64,
    pub charge: f64,
    pub tallies: Tallies,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tallies {
    pub demand: f64,
    pub generation: f64,
    /// Renewable energy consumed in the hour it was generated.
    pub direct: f64,
    /// Energy delivered to the load from the battery.
    pub battery_delivered: f64,
    pub battery_charged: f64,
    pub grid_import: f64,
    pub curtailed: f64,
    pub losses: f64,
}

impl Tallies {
    pub fn renewable_consumed(&self) -> f64 {
        self.direct + self.battery_delivered
    }
}

/// Energy flows of one hour (kWh). `discharged` is what reached the load;
/// `drawn` is what left the battery.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HourFlows {
    pub generation: f64,
    pub demand: f64,
    pub direct: f64,
    pub charged: f64,
    pub discharged: f64,
    pub drawn: f64,
    pub grid_import: f64,
    pub curtailed: f64,
}

impl HourFlows {
    /// `generation + discharged + grid_import − (demand + charged + curtailed)`.
    pub fn imbalance(&self) -> f64 {
        (self.generation + self.discharged + self.grid_import) - (self.demand + self.charged + self.curtailed)
    }
}

impl HourlyState {
    pub fn new(capacity: f64) -> Self {
        Self {
            capacity,
            ..Default::default()
        }
    }
}

/// Advances one hour: renewables serve demand first, surplus charges the
/// battery and the rest is curtailed; a deficit discharges the battery
/// (losing `1 − efficiency` of what is drawn) and the grid covers the rest.
pub fn dispatch_hour(state: &mut HourlyState, generation: f64, demand: f64, config: &AgentConfig) -> HourFlows {
    debug_assert!(generation >= 0.0 && demand >= 0.0);
    let eta = config.battery.efficiency;
    let direct = generation.min(demand);
    let surplus = generation - direct;
    let deficit = demand - direct;

    let charged = surplus.min(state.capacity - state.charge).max(0.0);
    state.charge += charged;
    let curtailed = surplus - charged;

    let (discharged, drawn) = if deficit > 0.0 && state.charge > 0.0 {
        let available = state.charge * eta;
        if available <= deficit {
            (available, state.charge)
        } else {
            (deficit, (deficit / eta).min(state.charge))
        }
    } else {
        (0.0, 0.0)
    };
    state.charge = (state.charge - drawn).clamp(0.0, state.capacity);
    let grid_import = deficit - discharged;

    let t = &mut state.tallies;
    t.demand += demand;
    t.generation += generation;
    t.direct += direct;
    t.battery_charged += charged;
    t.battery_delivered += discharged;
    t.grid_import += grid_import;
    t.curtailed += curtailed;
    t.losses += drawn - discharged;

    HourFlows {
        generation,
        demand,
        direct,
        charged,
        discharged,
        drawn,
        grid_import,
        curtailed,
    }
}

use serde::{Deserialize, Serialize};

use super::year::is_leap_day;
use super::{SensorKind, SensorSeries};

/// Physical bounds and an optional spike limit for one sensor kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CleanseRules {
    pub min: f64,
    pub max: f64,
    /// Largest allowed jump from the previous retained sample.
    #[serde(default)]
    pub spike: Option<f64>,
}

impl CleanseRules {
    pub fn for_kind(kind: SensorKind) -> Self {
        let (min, max) = match kind {
            SensorKind::SolarIrradiance => (0.0, 1500.0),
            SensorKind::WaterLevel => (0.0, 20.0),
            SensorKind::WaterFlow => (0.0, 1000.0),
            SensorKind::AirTemperature => (-40.0, 50.0),
        };
        Self { min, max, spike: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleansingReport {
    pub station: String,
    pub kind: String,
    pub input: usize,
    pub retained: usize,
    pub dropped: usize,
    /// Samples later substituted from a donor station.
    pub filled: usize,
    pub missing_flag: usize,
    pub below_min: usize,
    pub above_max: usize,
    pub spike: usize,
    pub leap_day: usize,
    /// Set when nothing survived.
    pub empty: bool,
}

/// Removes missing-flagged, leap-day, out-of-range and spike samples.
/// Applying it twice is the same as applying it once.
pub fn cleanse(series: &SensorSeries, rules: &CleanseRules) -> (SensorSeries, CleansingReport) {
    let mut rep = CleansingReport {
        station: series.station.clone(),
        kind: series.kind.to_string(),
        input: series.len(),
        ..Default::default()
    };
    let mut kept = Vec::with_capacity(series.len());
    let mut prev: Option<f64> = None;
    for s in &series.samples {
        let tally = if !s.is_usable() {
            &mut rep.missing_flag
        } else if is_leap_day(&s.ts) {
            &mut rep.leap_day
        } else if s.value < rules.min {
            &mut rep.below_min
        } else if s.value > rules.max {
            &mut rep.above_max
        } else if matches!((rules.spike, prev), (Some(lim), Some(p)) if (s.value - p).abs() > lim) {
            &mut rep.spike
        } else {
            prev = Some(s.value);
            kept.push(*s);
            continue;
        };
        *tally += 1;
    }
    rep.retained = kept.len();
    rep.dropped = rep.input - rep.retained;
    rep.empty = kept.is_empty();
    let out = SensorSeries {
        kind: series.kind,
        station: series.station.clone(),
        samples: kept,
    };
    (out, rep)
}

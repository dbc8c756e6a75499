//! Published reference numbers and seeded synthetic input data.
//!
//! The original resident survey and sensor archives are not public, so the
//! toolkit ships generators that produce inputs of the same shape: a
//! 483-respondent questionnaire with 62 incomplete rows, and one year of
//! hourly irradiance, water-level and temperature readings with injected
//! faults. Every random draw comes from a single `u64` seed.
//!
//! The reference constants are the published regression coefficients and
//! the four reported policies (status quo and the optima of value types
//! A, B and C).

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::coupling::{Baseline, MeanEntry, MeanVector};
use crate::io::write_text;
use crate::mabs::{AgentConfig, BatteryConfig, FacilityCost, LocalFlags, Profiles};
use crate::sensor::{
    demand_profile, hydro_profile, solar_profile, DemandParams, HydroParams, Quality, RatingCurve, Sample, SensorKind,
    SensorSeries, SimYear, SolarParams,
};
use crate::survey::{Classification, CoefficientRecord, ItemDescriptor, RegressionModel, INTERCEPT_ID};
use crate::{Result, HOURS_PER_YEAR};

/// Calendar year of the synthetic sensor data.
pub const FIXTURE_YEAR: i32 = 2023;

/// Status quo: everything bought from the grid.
pub const REFERENCE_BASELINE: Baseline = Baseline {
    p0: 4_157_930.0,
    u0: 0.0,
    d0: 0.0,
};

/// Annual PV yield, kWh per kW installed.
pub const PV_KWH_PER_KW: f64 = 1051.453;
/// Annual nano-hydro yield, kWh per metre of effective drop.
pub const HYDRO_KWH_PER_M: f64 = 29_088.65;

/// Published intercept as (β, SE, t, p).
pub const REFERENCE_INTERCEPT: (f64, f64, f64, f64) = (0.12842, 0.055365, 2.31953, 0.020854);

/// Published coefficients as (id, β, SE, t, p).
pub const REFERENCE_COEFFICIENTS: [(&str, f64, f64, f64, f64); 8] = [
    ("x1", 0.394934, 0.036739, 10.7497, 6.34e-24),
    ("x2", 0.158204, 0.048217, 3.28111, 0.001122),
    ("x3", 0.107405, 0.053776, 1.997277, 0.046452),
    ("x4", -0.02598, 0.04611, -0.56343, 0.573447),
    ("x5", 0.003615, 0.056051, 0.064494, 0.948608),
    ("x6", -0.00477, 0.046172, -0.10335, 0.917738),
    ("x7", 0.048433, 0.018388, 2.63404, 0.008755),
    ("x8", 0.252739, 0.052488, 4.815139, 2.07e-06),
];

pub const REFERENCE_R_SQUARED: f64 = 0.37;
pub const REFERENCE_RESPONDENTS: usize = 421;

/// Response item id used by the fixtures.
pub const RESPONSE_ID: &str = "wellbeing";

/// The published well-being model.
pub fn reference_model() -> RegressionModel {
    let rec = |id: &str, (beta, se, t, p): (f64, f64, f64, f64)| CoefficientRecord {
        id: id.to_string(),
        beta,
        se,
        t,
        p,
    };
    RegressionModel {
        response: RESPONSE_ID.to_string(),
        n: REFERENCE_RESPONDENTS,
        intercept: rec(INTERCEPT_ID, REFERENCE_INTERCEPT),
        coefficients: REFERENCE_COEFFICIENTS
            .iter()
            .map(|&(id, b, se, t, p)| rec(id, (b, se, t, p)))
            .collect(),
        r_squared: REFERENCE_R_SQUARED,
        residuals: Vec::new(),
    }
}

/// One reported policy and its outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferencePolicy {
    pub label: &'static str,
    pub psi: f64,
    /// ¥ per year.
    pub cost: f64,
    pub circulation: f64,
    pub utilization: f64,
    pub hydro_m: f64,
    pub hydro_kwh: f64,
    pub pv_kw: f64,
    pub pv_kwh: f64,
    pub battery_kwh: f64,
    /// ¥ per year paid to the power company.
    pub grid_purchase: f64,
}

pub const REFERENCE_POLICIES: [ReferencePolicy; 4] = [
    ReferencePolicy {
        label: "Now",
        psi: 0.702375,
        cost: 4_157_930.0,
        circulation: 0.0,
        utilization: 0.0,
        hydro_m: 0.0,
        hydro_kwh: 0.0,
        pv_kw: 0.0,
        pv_kwh: 0.0,
        battery_kwh: 0.0,
        grid_purchase: 4_157_930.0,
    },
    ReferencePolicy {
        label: "A",
        psi: 0.703907,
        cost: 2_908_197.0,
        circulation: 0.103,
        utilization: 0.530,
        hydro_m: 2.0,
        hydro_kwh: 58_177.3,
        pv_kw: 20.0,
        pv_kwh: 21_029.06,
        battery_kwh: 0.0,
        grid_purchase: 1_912_632.0,
    },
    ReferencePolicy {
        label: "B",
        psi: 0.768115,
        cost: 10_183_154.0,
        circulation: 0.589,
        utilization: 0.995,
        hydro_m: 20.0,
        hydro_kwh: 581_773.0,
        pv_kw: 800.0,
        pv_kwh: 841_162.6,
        battery_kwh: 0.0,
        grid_purchase: 886_561.0,
    },
    ReferencePolicy {
        label: "C",
        psi: 0.912414,
        cost: 16_978_103.0,
        circulation: 0.648,
        utilization: 1.0,
        hydro_m: 80.0,
        hydro_kwh: 2_327_091.0,
        pv_kw: 600.0,
        pv_kwh: 630_871.9,
        battery_kwh: 0.0,
        grid_purchase: 874_800.0,
    },
];

pub fn reference_policy(label: &str) -> Option<&'static ReferencePolicy> {
    REFERENCE_POLICIES.iter().find(|p| p.label == label)
}

/// Calibrated x8 mean, recovered from the value-type A gain.
pub const CALIBRATED_X8: f64 = 0.53901;
/// Calibrated x6 mean, recovered from the value-type B gain.
pub const CALIBRATED_X6: f64 = 0.73422;
/// Placeholder for means no published number pins down.
pub const UNANCHORED_MEAN: f64 = 0.5;

/// Respondent means for the reference model: x8 and x6 calibrated, the rest
/// placeholders flagged as unanchored.
pub fn calibrated_means() -> MeanVector {
    MeanVector {
        source: "calibrated".to_string(),
        entries: REFERENCE_COEFFICIENTS
            .iter()
            .map(|&(id, ..)| {
                let (value, anchored) = match id {
                    "x8" => (CALIBRATED_X8, true),
                    "x6" => (CALIBRATED_X6, true),
                    _ => (UNANCHORED_MEAN, false),
                };
                MeanEntry {
                    id: id.to_string(),
                    value,
                    anchored,
                }
            })
            .collect(),
    }
}

/// Default cost model: PV ¥250,000/kW over 20 years, nano-hydro
/// ¥1,500,000 per metre over 30 years, battery ¥150,000/kWh over 10 years,
/// grid energy ¥27/kWh and a ¥8/kWh consignment charge on local energy.
pub fn default_agent_config() -> AgentConfig {
    AgentConfig {
        pv: FacilityCost {
            unit_cost: 250_000.0,
            life_years: 20.0,
        },
        hydro: FacilityCost {
            unit_cost: 1_500_000.0,
            life_years: 30.0,
        },
        battery: BatteryConfig {
            unit_cost: 150_000.0,
            life_years: 10.0,
            efficiency: 0.9,
        },
        grid_tariff: 27.0,
        consignment_charge: 8.0,
        local: LocalFlags::default(),
    }
}

/// Annual demand (kWh) at which the all-grid year costs the baseline `p0`.
pub fn baseline_demand_kwh(config: &AgentConfig) -> f64 {
    REFERENCE_BASELINE.p0 / config.grid_tariff
}

pub fn solar_params() -> SolarParams {
    SolarParams {
        panel_efficiency: 0.2,
        performance_ratio: 0.8,
        calibrate_annual: Some(PV_KWH_PER_KW),
    }
}

pub fn hydro_params() -> HydroParams {
    HydroParams {
        efficiency: 0.7,
        calibrate_annual: Some(HYDRO_KWH_PER_M),
    }
}

pub fn demand_params(config: &AgentConfig) -> DemandParams {
    DemandParams {
        base_kwh: 12.0,
        setpoint_c: 22.0,
        deadband_c: 2.0,
        coefficient: 1.0,
        calibrate_annual: Some(baseline_demand_kwh(config)),
    }
}

/// Level (m) to flow (m³/s) table for the synthetic stream.
pub fn rating_curve() -> RatingCurve {
    RatingCurve::new(vec![
        (0.0, 0.0),
        (0.2, 0.05),
        (0.4, 0.25),
        (0.8, 1.0),
        (1.5, 3.0),
        (3.0, 8.0),
    ])
    .expect("static rating curve is monotone")
}

fn rng_for(seed: u64, stream: &str) -> ChaCha8Rng {
    let tag = stream.bytes().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    });
    ChaCha8Rng::seed_from_u64(seed ^ tag)
}

fn seasonal(day: f64, peak_day: f64) -> f64 {
    (2.0 * std::f64::consts::PI * (day - peak_day) / 365.0).cos()
}

fn irradiance_values(rng: &mut ChaCha8Rng, scale: f64) -> Vec<f64> {
    let jitter = Normal::new(0.0, 0.03).expect("valid normal");
    let mut out = Vec::with_capacity(HOURS_PER_YEAR);
    for day in 0..HOURS_PER_YEAR / 24 {
        let d = day as f64;
        let day_len = 12.0 + 2.4 * seasonal(d, 172.0);
        let sunrise = 12.0 - day_len / 2.0;
        let peak = 750.0 + 200.0 * seasonal(d, 172.0);
        let cloud: f64 = if rng.random_bool(0.35) {
            rng.random_range(0.15..0.6)
        } else {
            rng.random_range(0.75..1.0)
        };
        for hour in 0..24 {
            let t = hour as f64 + 0.5 - sunrise;
            let elevation = if t > 0.0 && t < day_len {
                (std::f64::consts::PI * t / day_len).sin()
            } else {
                0.0
            };
            let v = peak * elevation.powf(1.2) * cloud * (1.0 + jitter.sample(rng)) * scale;
            out.push(v.max(0.0));
        }
    }
    out
}

fn level_values(rng: &mut ChaCha8Rng, scale: f64) -> Vec<f64> {
    let noise = Normal::new(0.0, 0.01).expect("valid normal");
    let mut storm = 0.0_f64;
    let mut out = Vec::with_capacity(HOURS_PER_YEAR);
    for h in 0..HOURS_PER_YEAR {
        let d = h as f64 / 24.0;
        if h % 24 == 0 {
            let wet = 0.04 + 0.08 * (seasonal(d, 190.0) + 1.0) / 2.0;
            if rng.random_bool(wet) {
                storm += rng.random_range(0.1..0.9);
            }
        }
        storm *= (-1.0_f64 / 36.0).exp();
        let base = 0.42 + 0.12 * seasonal(d, 190.0);
        out.push(((base + storm + noise.sample(rng)) * scale).clamp(0.05, 3.0));
    }
    out
}

fn temperature_values(rng: &mut ChaCha8Rng, offset: f64) -> Vec<f64> {
    let shock = Normal::new(0.0, 0.6).expect("valid normal");
    let mut anomaly = 0.0;
    let mut out = Vec::with_capacity(HOURS_PER_YEAR);
    for h in 0..HOURS_PER_YEAR {
        let d = h as f64 / 24.0;
        let hod = (h % 24) as f64;
        anomaly = 0.97 * anomaly + shock.sample(rng);
        let diurnal = 4.0 * (2.0 * std::f64::consts::PI * (hod - 9.0) / 24.0).sin();
        out.push(16.0 - 10.0 * seasonal(d, 20.0) + diurnal + anomaly + offset);
    }
    out
}

fn to_series(kind: SensorKind, station: &str, values: Vec<f64>) -> SensorSeries {
    let year = SimYear::new(FIXTURE_YEAR);
    let samples = values
        .into_iter()
        .enumerate()
        .map(|(h, v)| Sample::ok(year.hour_start(h), v))
        .collect();
    SensorSeries::new(kind, station, samples).expect("hourly timestamps increase")
}

/// A complete, fault-free hourly series for one station.
pub fn clean_series(kind: SensorKind, station: &str, seed: u64) -> SensorSeries {
    let mut rng = rng_for(seed, station);
    let values = match kind {
        SensorKind::SolarIrradiance => irradiance_values(&mut rng, 1.0),
        SensorKind::WaterLevel => level_values(&mut rng, 1.0),
        SensorKind::WaterFlow => {
            let curve = rating_curve();
            level_values(&mut rng, 1.0).into_iter().map(|l| curve.flow(l)).collect()
        }
        SensorKind::AirTemperature => temperature_values(&mut rng, 0.0),
    };
    to_series(kind, station, values)
}

/// Faults written into a raw station file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InjectedFaults {
    pub missing_flag: usize,
    pub below_min: usize,
    pub above_max: usize,
    /// Hours with no row at all.
    pub absent_hours: usize,
}

/// A station with missing flags, out-of-range readings, a 24-hour outage
/// and scattered absent rows. Out-of-range values are far outside the
/// default physical bounds of the kind.
pub fn faulty_series(kind: SensorKind, station: &str, seed: u64) -> (SensorSeries, InjectedFaults) {
    let clean = clean_series(kind, station, seed);
    let mut rng = rng_for(seed, &format!("{station}/faults"));
    let (low, high) = match kind {
        SensorKind::SolarIrradiance => (-5.0, 2500.0),
        SensorKind::WaterLevel => (-1.0, 25.0),
        SensorKind::WaterFlow => (-1.0, 5000.0),
        SensorKind::AirTemperature => (-60.0, 70.0),
    };
    let outage_start = rng.random_range(24 * 30..HOURS_PER_YEAR - 24 * 30);
    let mut faults = InjectedFaults::default();
    let mut samples = Vec::with_capacity(clean.len());
    for (h, mut s) in clean.samples.into_iter().enumerate() {
        if (outage_start..outage_start + 24).contains(&h) || rng.random_bool(0.002) {
            faults.absent_hours += 1;
            continue;
        }
        let roll: f64 = rng.random();
        if roll < 0.005 {
            s.value = f64::NAN;
            s.quality = Quality::Missing;
            faults.missing_flag += 1;
        } else if roll < 0.0075 {
            s.value = low;
            faults.below_min += 1;
        } else if roll < 0.01 {
            s.value = high;
            faults.above_max += 1;
        }
        samples.push(s);
    }
    let series = SensorSeries::new(kind, station, samples).expect("subset of increasing timestamps");
    (series, faults)
}

/// A fault-free neighbouring station used to fill gaps.
pub fn donor_series(kind: SensorKind, station: &str, seed: u64) -> SensorSeries {
    let mut rng = rng_for(seed, station);
    let values = match kind {
        SensorKind::SolarIrradiance => irradiance_values(&mut rng, 0.95),
        SensorKind::WaterLevel | SensorKind::WaterFlow => level_values(&mut rng, 0.9),
        SensorKind::AirTemperature => temperature_values(&mut rng, -0.8),
    };
    to_series(kind, station, values)
}

/// Profiles built from clean synthetic stations and calibrated to the
/// published per-unit yields and the baseline demand of
/// [`default_agent_config`].
pub fn synthetic_profiles(seed: u64) -> Profiles {
    let year = SimYear::new(FIXTURE_YEAR);
    let config = default_agent_config();
    let irradiance = clean_series(SensorKind::SolarIrradiance, "S1", seed);
    let flow = clean_series(SensorKind::WaterFlow, "W1", seed);
    let temperature = clean_series(SensorKind::AirTemperature, "T1", seed);
    Profiles {
        pv: solar_profile(&irradiance, &solar_params(), year).expect("clean irradiance"),
        hydro: hydro_profile(&flow, &hydro_params(), year).expect("clean flow"),
        demand: demand_profile(&temperature, &demand_params(&config), year).expect("clean temperature"),
    }
}

/// Item schema of the synthetic questionnaire.
pub fn survey_items() -> Vec<ItemDescriptor> {
    use Classification::*;
    vec![
        ItemDescriptor::new("x1", Human, "How is your current health status?"),
        ItemDescriptor::new("x2", Human, "I think I am making my loved ones happy."),
        ItemDescriptor::new("x3", Society, "I trust people who live in the same district."),
        ItemDescriptor::new("x4", Society, "I have an attachment to this district."),
        ItemDescriptor::new("x5", Ecology, "Environmentally friendly behavior is socially required."),
        ItemDescriptor::new(
            "x6",
            Ecology,
            "Acting in an environmentally friendly manner is a source of pride.",
        ),
        ItemDescriptor::new("x7", Economy, "Is your place of work in the district?"),
        ItemDescriptor::new(
            "x8",
            Economy,
            "Compared to others in your district, how financially affluent are you?",
        ),
        ItemDescriptor::new("q09", Other, "How often do you use the community bus?"),
        ItemDescriptor::new("q10", Other, "How many rooms does your home have?"),
        ItemDescriptor::new("q11", Other, "How often do you shop outside the town?"),
        ItemDescriptor::new("q12", Other, "Do you live in the town? (everyone answered 4 = yes)"),
        ItemDescriptor::new(RESPONSE_ID, Response, "How well-being are you at present?"),
    ]
}

/// Seed of the shipped fixture files.
pub const DEFAULT_SEED: u64 = 42;

pub const SURVEY_ROWS: usize = 483;
pub const SURVEY_INCOMPLETE_ROWS: usize = 62;
/// Noise (normalized units) added to the well-being response.
const RESPONSE_NOISE: f64 = 0.21;

/// Item schema as CSV (`id,classification,question`).
pub fn survey_items_csv() -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["id", "classification", "question"])
        .expect("in-memory write");
    for it in survey_items() {
        w.write_record([it.id.as_str(), &it.classification.to_string(), it.question.as_str()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Questionnaire responses: a latent disposition drives x1..x8 (x7 is a
/// yes/no item, the rest a 1-5 scale), the 0-10 well-being answer follows
/// the published model plus noise, q09..q11 are unrelated and q12 is
/// constant. 62 rows have one blank answer among the model items.
pub fn synthetic_survey_csv(seed: u64) -> String {
    let mut rng = rng_for(seed, "survey");
    let std = Normal::new(0.0, 1.0).expect("valid normal");
    let noise = Normal::new(0.0, RESPONSE_NOISE).expect("valid normal");
    let likert = |v: f64| v.round().clamp(1.0, 5.0);
    let mut incomplete = rand::seq::index::sample(&mut rng, SURVEY_ROWS, SURVEY_INCOMPLETE_ROWS).into_vec();
    incomplete.sort_unstable();

    let items = survey_items();
    let mut out = items.iter().map(|i| i.id.as_str()).collect::<Vec<_>>().join(",") + "\n";
    for row in 0..SURVEY_ROWS {
        let f = std.sample(&mut rng);
        let mut raw = [0.0; 8];
        for (j, v) in raw.iter_mut().enumerate() {
            *v = if j == 6 {
                f64::from(u8::from(0.6 * f + std.sample(&mut rng) > 0.2))
            } else {
                likert(3.2 + 0.75 * f + 0.8 * std.sample(&mut rng))
            };
        }
        let x: Vec<f64> = raw
            .iter()
            .enumerate()
            .map(|(j, v)| if j == 6 { *v } else { v / 5.0 })
            .collect();
        let y = REFERENCE_COEFFICIENTS
            .iter()
            .zip(&x)
            .fold(REFERENCE_INTERCEPT.0, |acc, (c, v)| acc + c.1 * v)
            + noise.sample(&mut rng);
        let answer = (10.0 * y).round().clamp(0.0, 10.0);
        let others = [
            likert(3.0 + 1.1 * std.sample(&mut rng)),
            likert(3.0 + 1.1 * std.sample(&mut rng)),
            likert(3.0 + 1.1 * std.sample(&mut rng)),
            4.0,
        ];
        let mut cells: Vec<String> = raw
            .iter()
            .chain(&others)
            .chain([&answer])
            .map(|v| v.to_string())
            .collect();
        if incomplete.binary_search(&row).is_ok() {
            let blank = rng.random_range(0..8);
            cells[blank].clear();
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Sensor stations written by [`write_fixtures`]: (file stem, kind, station,
/// is donor).
pub const SENSOR_FILES: [(&str, SensorKind, &str, bool); 7] = [
    ("irradiance_S1", SensorKind::SolarIrradiance, "S1", false),
    ("irradiance_S2", SensorKind::SolarIrradiance, "S2", false),
    ("irradiance_donor", SensorKind::SolarIrradiance, "SD", true),
    ("level_W1", SensorKind::WaterLevel, "W1", false),
    ("level_donor", SensorKind::WaterLevel, "WD", true),
    ("temperature_T1", SensorKind::AirTemperature, "T1", false),
    ("temperature_donor", SensorKind::AirTemperature, "TD", true),
];

/// Writes the survey (`survey/items.csv`, `survey/responses.csv`) and the
/// sensor files (`sensors/<stem>.csv`) under `dir`; returns the paths.
pub fn write_fixtures(dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut put = |rel: &str, text: String| -> Result<()> {
        let path = dir.join(rel);
        write_text(&path, &text)?;
        written.push(path);
        Ok(())
    };
    put("survey/items.csv", survey_items_csv())?;
    put("survey/responses.csv", synthetic_survey_csv(seed))?;
    for (stem, kind, station, donor) in SENSOR_FILES {
        let series = if donor {
            donor_series(kind, station, seed)
        } else {
            faulty_series(kind, station, seed).0
        };
        put(&format!("sensors/{stem}.csv"), series.to_csv())?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{cost_modifier, Kpis};
    use crate::sensor::{cleanse, CleanseRules};
    use crate::survey::predict;

    #[test]
    fn model_predictions() {
        let m = reference_model();
        assert_eq!(predict(&m, &[0.0; 8]).unwrap(), 0.12842);
        assert!((predict(&m, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap() - 0.523354).abs() < 1e-12);
        let sum: f64 = 0.12842 + 0.394934 + 0.158204 + 0.107405 - 0.02598 + 0.003615 - 0.00477 + 0.048433 + 0.252739;
        assert!((predict(&m, &[1.0; 8]).unwrap() - sum).abs() < 1e-12);
    }

    #[test]
    fn generation_rows_are_proportional() {
        for p in &REFERENCE_POLICIES[1..] {
            assert!((p.hydro_m * HYDRO_KWH_PER_M - p.hydro_kwh).abs() / p.hydro_kwh < 1e-4);
            assert!((p.pv_kw * PV_KWH_PER_KW - p.pv_kwh).abs() / p.pv_kwh < 1e-4);
        }
    }

    #[test]
    fn calibrated_means_flags() {
        let m = calibrated_means();
        m.validate().unwrap();
        assert_eq!(m.ids(), reference_model().ids());
        assert_eq!(m.entries.iter().filter(|e| e.anchored).count(), 2);
    }

    #[test]
    fn type_a_cost_factor() {
        let a = reference_policy("A").unwrap();
        let k = Kpis {
            p: a.cost,
            u: a.utilization,
            d: a.circulation,
        };
        let f = cost_modifier(k.p, REFERENCE_BASELINE.p0, 0.037).unwrap();
        assert!((f - 1.0112458).abs() < 1e-6);
    }

    #[test]
    fn synthetic_profiles_hit_targets() {
        let p = synthetic_profiles(7);
        assert!((p.pv.annual_per_unit - PV_KWH_PER_KW).abs() < 1e-6);
        assert!((p.hydro.annual_per_unit - HYDRO_KWH_PER_M).abs() < 1e-6);
        let demand = baseline_demand_kwh(&default_agent_config());
        assert!((p.demand.annual_kwh - demand).abs() / demand < 1e-12);
        assert_eq!(p.pv.hourly.len(), HOURS_PER_YEAR);
        assert!(p.pv.calibration.scale > 0.5 && p.pv.calibration.scale < 2.0);
        assert!(p.hydro.calibration.scale > 0.5 && p.hydro.calibration.scale < 2.0);
    }

    #[test]
    fn generators_are_seeded() {
        assert_eq!(synthetic_survey_csv(3), synthetic_survey_csv(3));
        assert_ne!(synthetic_survey_csv(3), synthetic_survey_csv(4));
        let (a, fa) = faulty_series(SensorKind::WaterLevel, "W1", 1);
        let (b, fb) = faulty_series(SensorKind::WaterLevel, "W1", 1);
        assert_eq!((a.to_csv(), fa), (b.to_csv(), fb));
    }

    #[test]
    fn injected_faults_are_all_caught() {
        for kind in [
            SensorKind::SolarIrradiance,
            SensorKind::WaterLevel,
            SensorKind::AirTemperature,
        ] {
            let (raw, faults) = faulty_series(kind, "X", 11);
            let (out, rep) = cleanse(&raw, &CleanseRules::for_kind(kind));
            assert_eq!(rep.missing_flag, faults.missing_flag);
            assert_eq!(rep.below_min, faults.below_min);
            assert_eq!(rep.above_max, faults.above_max);
            assert_eq!(rep.dropped, faults.missing_flag + faults.below_min + faults.above_max);
            assert_eq!(out.len() + faults.absent_hours + rep.dropped, HOURS_PER_YEAR);
        }
    }

    #[test]
    fn survey_shape() {
        let text = synthetic_survey_csv(1);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), SURVEY_ROWS + 1);
        let blanks = lines[1..].iter().filter(|l| l.split(',').any(str::is_empty)).count();
        assert_eq!(blanks, SURVEY_INCOMPLETE_ROWS);
    }

    fn fit_fixture(seed: u64) -> (Vec<String>, RegressionModel, usize) {
        use crate::survey::{extract_explanatory, fit_ols, load_survey, normalize_items, ScreeningThresholds};
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("responses.csv");
        write_text(&path, &synthetic_survey_csv(seed)).unwrap();
        let raw = load_survey(&path, &survey_items()).unwrap();
        let dropped = raw.dropped_rows;
        let m = normalize_items(raw).unwrap();
        let report = extract_explanatory(&m, RESPONSE_ID, ScreeningThresholds::default()).unwrap();
        let mut selected: Vec<String> = report.selected_ids().map(String::from).collect();
        selected.sort();
        let model = fit_ols(&m, RESPONSE_ID, &selected).unwrap();
        (selected, model, dropped)
    }

    #[test]
    fn shipped_survey_selects_model_items_and_fits_like_the_field_data() {
        let (selected, model, dropped) = fit_fixture(DEFAULT_SEED);
        assert_eq!(dropped, SURVEY_INCOMPLETE_ROWS);
        assert_eq!(model.n, REFERENCE_RESPONDENTS);
        assert_eq!(selected, ["x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8"]);
        assert!((0.30..=0.45).contains(&model.r_squared), "R² = {}", model.r_squared);
    }
}

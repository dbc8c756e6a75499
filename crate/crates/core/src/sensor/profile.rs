//! Hourly per-unit generation and demand profiles.
//!
//! PV: kWh per kW each hour is the hour's mean irradiance (W/m²) over the
//! 1 kW/m² rating irradiance, times the performance ratio.
//!
//! Nano-hydro: kWh per metre of effective drop each hour is
//! `ρ·g·Q·η·Δt / 3.6e6` with ρ = 1000 kg/m³, g = 9.8 m/s², Δt = 3600 s.
//!
//! Demand: `base + coefficient·max(0, |T − setpoint| − deadband)`.
//!
//! Each profile may be rescaled so its annual total hits a calibration
//! target; the scale factor is recorded alongside.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{SensorKind, SensorSeries, SimYear};
use crate::{Error, Result, HOURS_PER_YEAR};

const WATER_DENSITY: f64 = 1000.0;
const GRAVITY: f64 = 9.8;
const SECONDS_PER_HOUR: f64 = 3600.0;
const JOULES_PER_KWH: f64 = 3.6e6;
const RATING_IRRADIANCE: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileUnit {
    /// kWh per kW of installed PV capacity.
    PerKw,
    /// kWh per metre of effective hydraulic drop.
    PerMeterDrop,
    /// kWh of consumption.
    Kwh,
}

impl ProfileUnit {
    fn column(self) -> &'static str {
        match self {
            ProfileUnit::PerKw => "kwh_per_kw",
            ProfileUnit::PerMeterDrop => "kwh_per_m",
            ProfileUnit::Kwh => "kwh",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Annual total before scaling.
    pub raw_annual: f64,
    pub scale: f64,
    pub target: Option<f64>,
}

impl Calibration {
    fn apply(hourly: &mut [f64], target: Option<f64>) -> Result<Self> {
        let raw_annual: f64 = hourly.iter().sum();
        let scale = match target {
            None => 1.0,
            Some(t) if !(t >= 0.0) || !t.is_finite() => {
                return Err(Error::Domain(format!(
                    "calibration target {t} must be a nonnegative number"
                )))
            }
            Some(t) if raw_annual > 0.0 => t / raw_annual,
            Some(t) if t == 0.0 => 1.0,
            Some(_) => {
                return Err(Error::Domain(
                    "cannot calibrate an all-zero profile to a positive target".into(),
                ))
            }
        };
        if scale != 1.0 {
            hourly.iter_mut().for_each(|v| *v *= scale);
        }
        Ok(Self {
            raw_annual,
            scale,
            target,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationProfile {
    pub unit: ProfileUnit,
    #[serde(skip)]
    pub hourly: Vec<f64>,
    pub annual_per_unit: f64,
    pub calibration: Calibration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandProfile {
    #[serde(skip)]
    pub hourly: Vec<f64>,
    pub annual_kwh: f64,
    pub calibration: Calibration,
}

impl GenerationProfile {
    fn build(unit: ProfileUnit, mut hourly: Vec<f64>, target: Option<f64>) -> Result<Self> {
        let calibration = Calibration::apply(&mut hourly, target)?;
        Ok(Self {
            unit,
            annual_per_unit: hourly.iter().sum(),
            hourly,
            calibration,
        })
    }

    /// Wraps an existing hourly vector (no calibration).
    pub fn from_hourly(unit: ProfileUnit, hourly: Vec<f64>) -> Result<Self> {
        check_hourly(&hourly)?;
        Self::build(unit, hourly, None)
    }

    pub fn zeros(unit: ProfileUnit) -> Self {
        Self::from_hourly(unit, vec![0.0; HOURS_PER_YEAR]).expect("valid")
    }

    pub fn to_csv(&self) -> String {
        hourly_csv(self.unit.column(), &self.hourly)
    }

    pub fn sidecar_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializes") + "\n"
    }
}

impl DemandProfile {
    pub fn from_hourly(hourly: Vec<f64>) -> Result<Self> {
        check_hourly(&hourly)?;
        let calibration = Calibration::apply(&mut hourly.clone(), None)?;
        Ok(Self {
            annual_kwh: hourly.iter().sum(),
            hourly,
            calibration,
        })
    }

    pub fn to_csv(&self) -> String {
        hourly_csv(ProfileUnit::Kwh.column(), &self.hourly)
    }

    pub fn sidecar_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializes") + "\n"
    }
}

fn check_hourly(hourly: &[f64]) -> Result<()> {
    if hourly.len() != HOURS_PER_YEAR {
        return Err(Error::Domain(format!(
            "profile has {} hours, expected {HOURS_PER_YEAR}",
            hourly.len()
        )));
    }
    if let Some((h, v)) = hourly.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("profile hour {h} has invalid value {v}")));
    }
    Ok(())
}

fn hourly_csv(column: &str, hourly: &[f64]) -> String {
    let mut out = String::with_capacity(hourly.len() * 24);
    out.push_str("hour,");
    out.push_str(column);
    out.push('\n');
    for (h, v) in hourly.iter().enumerate() {
        out.push_str(&format!("{h},{v}\n"));
    }
    out
}

fn read_hourly(path: &Path, column: &str) -> Result<Vec<f64>> {
    let text = crate::io::read_text(path)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header != format!("hour,{column}") {
        return Err(Error::parse(
            path.display(),
            1,
            format!("expected header 'hour,{column}', got '{header}'"),
        ));
    }
    let mut out = Vec::with_capacity(HOURS_PER_YEAR);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let (h, v) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(path.display(), lineno, "expected two columns"))?;
        if h.parse::<usize>().ok() != Some(i) {
            return Err(Error::parse(
                path.display(),
                lineno,
                format!("hour index '{h}' out of sequence"),
            ));
        }
        out.push(crate::io::parse_f64(path, lineno, column, v)?);
    }
    check_hourly(&out).map_err(|e| Error::parse(path.display(), 0, e.to_string()))?;
    Ok(out)
}

/// Reads a generation profile CSV plus its JSON sidecar.
pub fn read_generation(csv_path: &Path, json_path: &Path) -> Result<GenerationProfile> {
    let meta_text = crate::io::read_text(json_path)?;
    let mut meta: GenerationProfile =
        serde_json::from_str(&meta_text).map_err(|e| Error::parse(json_path.display(), e.line(), e.to_string()))?;
    meta.hourly = read_hourly(csv_path, meta.unit.column())?;
    Ok(meta)
}

pub fn read_demand(csv_path: &Path, json_path: &Path) -> Result<DemandProfile> {
    let meta_text = crate::io::read_text(json_path)?;
    let mut meta: DemandProfile =
        serde_json::from_str(&meta_text).map_err(|e| Error::parse(json_path.display(), e.line(), e.to_string()))?;
    meta.hourly = read_hourly(csv_path, ProfileUnit::Kwh.column())?;
    Ok(meta)
}

/// Mean of the usable samples in every hour of `year`. Fails if any hour
/// has none.
pub fn hourly_means(series: &SensorSeries, year: SimYear) -> Result<Vec<f64>> {
    let mut sum = vec![0.0; HOURS_PER_YEAR];
    let mut cnt = vec![0u32; HOURS_PER_YEAR];
    for s in series.samples.iter().filter(|s| s.is_usable()) {
        if let Some(h) = year.hour_index(&s.ts) {
            sum[h] += s.value;
            cnt[h] += 1;
        }
    }
    let missing: Vec<usize> = (0..HOURS_PER_YEAR).filter(|&h| cnt[h] == 0).collect();
    if let Some(&first) = missing.first() {
        return Err(Error::InsufficientData(format!(
            "station {} ({}) lacks data for {} of {HOURS_PER_YEAR} hours of {}, first at {}",
            series.station,
            series.kind,
            missing.len(),
            year.year,
            year.hour_start(first)
        )));
    }
    Ok(sum.iter().zip(&cnt).map(|(s, &c)| s / c as f64).collect())
}

/// Weighted hourly mean across stations of one kind. Hours where no station
/// has data are left out of the result.
pub fn combine_stations(series: &[SensorSeries], weights: Option<&[f64]>, year: SimYear) -> Result<SensorSeries> {
    let first = series
        .first()
        .ok_or_else(|| Error::Domain("combine_stations: no stations".into()))?;
    if let Some(s) = series.iter().find(|s| s.kind != first.kind) {
        return Err(Error::Domain(format!(
            "station {} is {}, expected {}",
            s.station, s.kind, first.kind
        )));
    }
    let weights: Vec<f64> = match weights {
        Some(w) if w.len() != series.len() => {
            return Err(Error::Domain(format!(
                "{} weights for {} stations",
                w.len(),
                series.len()
            )))
        }
        Some(w) if w.iter().any(|x| !(*x > 0.0)) => {
            return Err(Error::Domain("station weights must be positive".into()))
        }
        Some(w) => w.to_vec(),
        None => vec![1.0; series.len()],
    };
    let mut num = vec![0.0; HOURS_PER_YEAR];
    let mut den = vec![0.0; HOURS_PER_YEAR];
    for (s, &w) in series.iter().zip(&weights) {
        let mut sum = vec![0.0; HOURS_PER_YEAR];
        let mut cnt = vec![0u32; HOURS_PER_YEAR];
        for x in s.samples.iter().filter(|x| x.is_usable()) {
            if let Some(h) = year.hour_index(&x.ts) {
                sum[h] += x.value;
                cnt[h] += 1;
            }
        }
        for h in (0..HOURS_PER_YEAR).filter(|&h| cnt[h] > 0) {
            num[h] += w * sum[h] / cnt[h] as f64;
            den[h] += w;
        }
    }
    let samples = (0..HOURS_PER_YEAR)
        .filter(|&h| den[h] > 0.0)
        .map(|h| super::Sample::ok(year.hour_start(h), num[h] / den[h]))
        .collect();
    let station = series.iter().map(|s| s.station.as_str()).collect::<Vec<_>>().join("+");
    SensorSeries::new(first.kind, &station, samples)
}

fn unit_interval(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} {v} outside (0, 1]")))
    }
}

fn expect_kind(series: &SensorSeries, kind: SensorKind) -> Result<()> {
    if series.kind == kind {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "station {} is {}, expected {kind}",
            series.station, series.kind
        )))
    }
}

fn reject_negative(series: &SensorSeries, hourly: &[f64]) -> Result<()> {
    match hourly.iter().position(|v| *v < 0.0) {
        Some(h) => Err(Error::Domain(format!(
            "station {} has negative {} in hour {h}; cleanse the series first",
            series.station, series.kind
        ))),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolarParams {
    /// Module efficiency; informational, already folded into the kW rating.
    pub panel_efficiency: f64,
    pub performance_ratio: f64,
    #[serde(default)]
    pub calibrate_annual: Option<f64>,
}

pub fn solar_profile(irradiance: &SensorSeries, params: &SolarParams, year: SimYear) -> Result<GenerationProfile> {
    expect_kind(irradiance, SensorKind::SolarIrradiance)?;
    unit_interval("panel efficiency", params.panel_efficiency)?;
    unit_interval("performance ratio", params.performance_ratio)?;
    let mean = hourly_means(irradiance, year)?;
    reject_negative(irradiance, &mean)?;
    let hourly = mean
        .iter()
        .map(|w| w / RATING_IRRADIANCE * params.performance_ratio)
        .collect();
    GenerationProfile::build(ProfileUnit::PerKw, hourly, params.calibrate_annual)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HydroParams {
    pub efficiency: f64,
    #[serde(default)]
    pub calibrate_annual: Option<f64>,
}

/// kWh produced in one hour per metre of drop at flow `q` (m³/s).
pub fn hydro_kwh_per_meter(q: f64, efficiency: f64) -> f64 {
    WATER_DENSITY * GRAVITY * q * efficiency * SECONDS_PER_HOUR / JOULES_PER_KWH
}

pub fn hydro_profile(flow: &SensorSeries, params: &HydroParams, year: SimYear) -> Result<GenerationProfile> {
    expect_kind(flow, SensorKind::WaterFlow)?;
    unit_interval("turbine efficiency", params.efficiency)?;
    if let Some(s) = flow.samples.iter().find(|s| s.is_usable() && s.value < 0.0) {
        return Err(Error::Domain(format!(
            "station {}: negative flow {} at {}; cleanse the series first",
            flow.station, s.value, s.ts
        )));
    }
    let mean = hourly_means(flow, year)?;
    let hourly = mean
        .iter()
        .map(|&q| hydro_kwh_per_meter(q, params.efficiency))
        .collect();
    GenerationProfile::build(ProfileUnit::PerMeterDrop, hourly, params.calibrate_annual)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandParams {
    pub base_kwh: f64,
    pub setpoint_c: f64,
    #[serde(default)]
    pub deadband_c: f64,
    /// Air-conditioning kWh per degree-hour beyond the deadband.
    pub coefficient: f64,
    #[serde(default)]
    pub calibrate_annual: Option<f64>,
}

pub fn demand_profile(temperature: &SensorSeries, params: &DemandParams, year: SimYear) -> Result<DemandProfile> {
    expect_kind(temperature, SensorKind::AirTemperature)?;
    if !(params.base_kwh >= 0.0) || !(params.coefficient >= 0.0) || !(params.deadband_c >= 0.0) {
        return Err(Error::Domain(
            "demand base, coefficient and deadband must be nonnegative".into(),
        ));
    }
    let temps = hourly_means(temperature, year)?;
    let mut hourly: Vec<f64> = temps
        .iter()
        .map(|t| params.base_kwh + params.coefficient * ((t - params.setpoint_c).abs() - params.deadband_c).max(0.0))
        .collect();
    let calibration = Calibration::apply(&mut hourly, params.calibrate_annual)?;
    Ok(DemandProfile {
        annual_kwh: hourly.iter().sum(),
        hourly,
        calibration,
    })
}

/// Monotone piecewise-linear level→flow table, clamped at both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct RatingCurve {
    points: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for RatingCurve {
    type Error = Error;

    fn try_from(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Config("rating curve needs at least two points".into()));
        }
        if points.iter().any(|(l, q)| !l.is_finite() || !q.is_finite() || *q < 0.0) {
            return Err(Error::Config(
                "rating curve points must be finite with nonnegative flow".into(),
            ));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0) || w[1].1 < w[0].1) {
            return Err(Error::Config(
                "rating curve must have strictly increasing levels and non-decreasing flows".into(),
            ));
        }
        Ok(Self { points })
    }
}

impl From<RatingCurve> for Vec<(f64, f64)> {
    fn from(c: RatingCurve) -> Self {
        c.points
    }
}

impl RatingCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        Self::try_from(points)
    }

    pub fn flow(&self, level: f64) -> f64 {
        let pts = &self.points;
        if level <= pts[0].0 {
            return pts[0].1;
        }
        let last = pts[pts.len() - 1];
        if level >= last.0 {
            return last.1;
        }
        let i = pts.partition_point(|p| p.0 <= level);
        let (l0, q0) = pts[i - 1];
        let (l1, q1) = pts[i];
        q0 + (q1 - q0) * (level - l0) / (l1 - l0)
    }

    /// Converts a water-level series into a flow series; missing samples
    /// stay missing.
    pub fn to_flow(&self, level: &SensorSeries) -> Result<SensorSeries> {
        expect_kind(level, SensorKind::WaterLevel)?;
        let samples = level
            .samples
            .iter()
            .map(|s| super::Sample {
                value: if s.is_usable() { self.flow(s.value) } else { s.value },
                ..*s
            })
            .collect();
        Ok(SensorSeries {
            kind: SensorKind::WaterFlow,
            station: level.station.clone(),
            samples,
        })
    }
}

//! Sensor series ingest, cleansing, donor gap filling and hourly profiles.

mod cleanse;
mod gap_fill;
mod profile;
mod year;

use std::fmt;
use std::path::Path;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use cleanse::{cleanse, CleanseRules, CleansingReport};
pub use gap_fill::gap_fill;
pub use profile::{
    combine_stations, demand_profile, hourly_means, hydro_profile, read_demand, read_generation, solar_profile,
    Calibration, DemandParams, DemandProfile, GenerationProfile, HydroParams, ProfileUnit, RatingCurve, SolarParams,
};
pub use year::SimYear;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorKind {
    /// W/m²
    SolarIrradiance,
    /// m
    WaterLevel,
    /// m³/s
    WaterFlow,
    /// °C
    AirTemperature,
}

impl SensorKind {
    pub fn unit(self) -> &'static str {
        match self {
            SensorKind::SolarIrradiance => "W/m2",
            SensorKind::WaterLevel => "m",
            SensorKind::WaterFlow => "m3/s",
            SensorKind::AirTemperature => "degC",
        }
    }
}

impl fmt::Display for SensorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SensorKind::SolarIrradiance => "solar_irradiance",
            SensorKind::WaterLevel => "water_level",
            SensorKind::WaterFlow => "water_flow",
            SensorKind::AirTemperature => "air_temperature",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quality {
    Ok,
    /// Flagged missing at the source ("M") or blank.
    Missing,
    /// Substituted from a donor station.
    Filled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub ts: NaiveDateTime,
    pub value: f64,
    pub quality: Quality,
}

impl Sample {
    pub fn ok(ts: NaiveDateTime, value: f64) -> Self {
        Self {
            ts,
            value,
            quality: Quality::Ok,
        }
    }

    pub fn is_usable(&self) -> bool {
        self.quality != Quality::Missing && self.value.is_finite()
    }
}

/// One station's time series, ordered by strictly increasing timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSeries {
    pub kind: SensorKind,
    pub station: String,
    pub samples: Vec<Sample>,
}

impl SensorSeries {
    pub fn new(kind: SensorKind, station: &str, samples: Vec<Sample>) -> Result<Self> {
        if let Some(w) = samples.windows(2).find(|w| w[1].ts <= w[0].ts) {
            return Err(Error::Domain(format!(
                "station {station}: timestamps not strictly increasing at {}",
                w[1].ts
            )));
        }
        Ok(Self {
            kind,
            station: station.to_string(),
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("timestamp,value,flag\n");
        for s in &self.samples {
            let flag = match s.quality {
                Quality::Ok => "",
                Quality::Missing => "M",
                Quality::Filled => "F",
            };
            let value = if s.value.is_finite() {
                s.value.to_string()
            } else {
                String::new()
            };
            out.push_str(&format!("{},{value},{flag}\n", s.ts.format(TS_FORMAT)));
        }
        out
    }
}

pub const TS_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim().trim_end_matches('Z');
    [
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ]
    .iter()
    .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

/// Reads a sensor CSV: ISO-8601 `timestamp`, numeric `value`, optional
/// `flag` column where "M" marks a missing reading.
pub fn read_sensor_csv(path: &Path, kind: SensorKind, station: &str) -> Result<SensorSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| crate::survey::csv_error(path, e))?;
    let header = rdr.headers().map_err(|e| crate::survey::csv_error(path, e))?.clone();
    if header.len() < 2 {
        return Err(Error::parse(
            path.display(),
            1,
            "expected timestamp,value[,flag] header",
        ));
    }
    let mut samples: Vec<Sample> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| crate::survey::csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let ts = parse_timestamp(&rec[0])
            .ok_or_else(|| Error::parse(path.display(), line, format!("bad timestamp '{}'", &rec[0])))?;
        if let Some(prev) = samples.last() {
            if ts <= prev.ts {
                return Err(Error::parse(
                    path.display(),
                    line,
                    format!("timestamp {ts} not after {}", prev.ts),
                ));
            }
        }
        let flag = rec.get(2).unwrap_or("");
        let cell = rec.get(1).unwrap_or("");
        let (value, quality) = if flag.eq_ignore_ascii_case("M") || cell.is_empty() {
            (f64::NAN, Quality::Missing)
        } else {
            let q = if flag.eq_ignore_ascii_case("F") {
                Quality::Filled
            } else {
                Quality::Ok
            };
            (crate::io::parse_f64(path, line, "value", cell)?, q)
        };
        samples.push(Sample { ts, value, quality });
    }
    Ok(SensorSeries {
        kind,
        station: station.to_string(),
        samples,
    })
}

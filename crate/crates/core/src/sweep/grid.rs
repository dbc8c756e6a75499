use serde::{Deserialize, Serialize};

use crate::mabs::PolicyParams;
use crate::{Error, Result};

/// Inclusive `min..=max` in increments of `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl AxisRange {
    pub const fn new(min: f64, max: f64, step: f64) -> Self {
        Self { min, max, step }
    }

    pub fn single(v: f64) -> Self {
        Self::new(v, v, 1.0)
    }

    /// Range violations as `(field, message)` pairs.
    pub fn diagnostics(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if !(self.step > 0.0) || !self.step.is_finite() {
            out.push(("step", format!("{} must be > 0", self.step)));
        }
        if !(self.min >= 0.0) || !self.min.is_finite() {
            out.push(("min", format!("{} must be finite and >= 0", self.min)));
        }
        if !(self.max >= self.min) || !self.max.is_finite() {
            out.push(("max", format!("{} must be finite and >= min", self.max)));
        }
        out
    }

    pub fn count(&self) -> Result<u64> {
        if let Some((field, msg)) = self.diagnostics().into_iter().next() {
            return Err(Error::Domain(format!("axis {field}: {msg}")));
        }
        Ok(((self.max - self.min) / self.step + 1e-9).floor() as u64 + 1)
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        let n = self.count()?;
        Ok((0..n).map(|i| self.min + i as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub pv: AxisRange,
    pub hydro: AxisRange,
    pub battery: AxisRange,
    #[serde(default = "default_max")]
    pub max_candidates: usize,
}

fn default_max() -> usize {
    1_000_000
}

impl Default for SweepGrid {
    /// 50 PV sizes × 40 drops × 10 battery sizes = 20,000 candidates.
    fn default() -> Self {
        Self {
            pv: AxisRange::new(0.0, 980.0, 20.0),
            hydro: AxisRange::new(2.0, 80.0, 2.0),
            battery: AxisRange::new(0.0, 450.0, 50.0),
            max_candidates: default_max(),
        }
    }
}

impl SweepGrid {
    pub fn candidate_count(&self) -> Result<u128> {
        Ok(self.pv.count()? as u128 * self.hydro.count()? as u128 * self.battery.count()? as u128)
    }
}

/// Cartesian product with PV outermost and battery innermost; `k` starts
/// at 1.
pub fn generate_grid(grid: &SweepGrid) -> Result<Vec<PolicyParams>> {
    let count = grid.candidate_count()?;
    if count > grid.max_candidates as u128 {
        return Err(Error::GridTooLarge {
            count,
            max: grid.max_candidates,
        });
    }
    let (pv, hydro, battery) = (grid.pv.values()?, grid.hydro.values()?, grid.battery.values()?);
    let mut out = Vec::with_capacity(count as usize);
    for &p in &pv {
        for &h in &hydro {
            for &b in &battery {
                out.push(PolicyParams::new(out.len() + 1, p, h, b));
            }
        }
    }
    Ok(out)
}

use std::fmt::Write as _;
use std::path::Path;

use super::{Candidate, CandidateSet, TernaryPoint};
use crate::mabs::{CostBreakdown, PolicyIndices, PolicyParams};
use crate::{Error, Result};

const BASE_COLUMNS: &[&str] = &[
    "k",
    "pv_kw",
    "hydro_m",
    "battery_kwh",
    "cost",
    "u",
    "d",
    "grid_purchase",
    "pv_kwh",
    "hydro_kwh",
    "curtailed_kwh",
    "grid_import_kwh",
    "renewable_kwh",
    "demand_kwh",
    "cost_grid",
    "cost_pv",
    "cost_hydro",
    "cost_battery",
    "cost_consignment",
];
const TERNARY_COLUMNS: &[&str] = &["social", "ecological", "economic"];

/// One row per candidate; ternary shares are appended when given.
pub fn candidates_csv(set: &CandidateSet, ternary: Option<&[TernaryPoint]>) -> String {
    let mut out = String::with_capacity(set.len() * 256);
    out.push_str(&BASE_COLUMNS.join(","));
    if ternary.is_some() {
        out.push(',');
        out.push_str(&TERNARY_COLUMNS.join(","));
    }
    out.push('\n');
    for (i, c) in set.candidates.iter().enumerate() {
        let (p, a) = (&c.params, &c.indices);
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            p.k,
            p.pv_kw,
            p.hydro_m,
            p.battery_kwh,
            a.cost_p,
            a.utilization_u,
            a.circulation_d,
            a.grid_purchase,
            a.annual_pv_kwh,
            a.annual_hydro_kwh,
            a.curtailed_kwh,
            a.grid_import_kwh,
            a.renewable_consumed_kwh,
            a.demand_kwh,
            a.costs.grid,
            a.costs.pv,
            a.costs.hydro,
            a.costs.battery,
            a.costs.consignment
        );
        if let Some(t) = ternary.and_then(|t| t.get(i)) {
            let _ = write!(out, ",{},{},{}", t.social, t.ecological, t.economic);
        }
        out.push('\n');
    }
    out
}

pub fn ternary_csv(points: &[TernaryPoint]) -> String {
    let mut out = String::from("k,social,ecological,economic,centroid_fallback\n");
    for t in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            t.k, t.social, t.ecological, t.economic, t.centroid_fallback
        );
    }
    out
}

/// Parses a file written by [`candidates_csv`], returning the ternary
/// columns when present.
pub fn read_candidates_csv(path: &Path) -> Result<(CandidateSet, Option<Vec<TernaryPoint>>)> {
    let text = crate::io::read_text(path)?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let with_ternary = if header == BASE_COLUMNS {
        false
    } else if header.len() == BASE_COLUMNS.len() + TERNARY_COLUMNS.len()
        && header[..BASE_COLUMNS.len()] == *BASE_COLUMNS
        && header[BASE_COLUMNS.len()..] == *TERNARY_COLUMNS
    {
        true
    } else {
        return Err(Error::parse(path.display(), 1, "unexpected candidates header"));
    };
    let mut candidates = Vec::new();
    let mut ternary = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != header.len() {
            return Err(Error::parse(
                path.display(),
                lineno,
                format!("expected {} columns", header.len()),
            ));
        }
        let f = |j: usize| crate::io::parse_f64(path, lineno, header[j], cells[j]);
        let k: usize = cells[0]
            .parse()
            .map_err(|_| Error::parse(path.display(), lineno, format!("bad k '{}'", cells[0])))?;
        let params = PolicyParams::new(k, f(1)?, f(2)?, f(3)?);
        let indices = PolicyIndices {
            cost_p: f(4)?,
            utilization_u: f(5)?,
            circulation_d: f(6)?,
            grid_purchase: f(7)?,
            annual_pv_kwh: f(8)?,
            annual_hydro_kwh: f(9)?,
            curtailed_kwh: f(10)?,
            grid_import_kwh: f(11)?,
            renewable_consumed_kwh: f(12)?,
            demand_kwh: f(13)?,
            costs: CostBreakdown {
                grid: f(14)?,
                pv: f(15)?,
                hydro: f(16)?,
                battery: f(17)?,
                consignment: f(18)?,
            },
        };
        if with_ternary {
            let n = BASE_COLUMNS.len();
            ternary.push(TernaryPoint {
                k,
                social: f(n)?,
                ecological: f(n + 1)?,
                economic: f(n + 2)?,
                centroid_fallback: false,
            });
        }
        candidates.push(Candidate { params, indices });
    }
    if candidates.iter().enumerate().any(|(i, c)| c.params.k != i + 1) {
        return Err(Error::parse(
            path.display(),
            0,
            "candidate indices must run 1..=l in order",
        ));
    }
    Ok((CandidateSet { candidates }, with_ternary.then_some(ternary)))
}

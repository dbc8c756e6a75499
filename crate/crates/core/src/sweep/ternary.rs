use serde::{Deserialize, Serialize};

use super::CandidateSet;
use crate::{Error, Result};

/// Social/ecological/economic shares of one candidate, summing to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TernaryPoint {
    pub k: usize,
    pub social: f64,
    pub ecological: f64,
    pub economic: f64,
    /// All three scores were zero and the centroid was used.
    pub centroid_fallback: bool,
}

/// Scores each candidate as social = d, ecological = u and economic =
/// p_min / p (the cheapest candidate scores 1), then normalizes the triple.
pub fn ternary_coords(set: &CandidateSet) -> Result<Vec<TernaryPoint>> {
    if set.is_empty() {
        return Err(Error::Domain("ternary_coords: empty candidate set".into()));
    }
    if let Some(c) = set.candidates.iter().find(|c| !(c.indices.cost_p > 0.0)) {
        return Err(Error::Domain(format!("candidate {} has non-positive cost", c.params.k)));
    }
    let p_min = set
        .candidates
        .iter()
        .map(|c| c.indices.cost_p)
        .fold(f64::INFINITY, f64::min);
    Ok(set
        .candidates
        .iter()
        .map(|c| {
            let scores = [
                c.indices.circulation_d,
                c.indices.utilization_u,
                p_min / c.indices.cost_p,
            ];
            let (shares, fallback) = normalize(scores);
            TernaryPoint {
                k: c.params.k,
                social: shares[0],
                ecological: shares[1],
                economic: shares[2],
                centroid_fallback: fallback,
            }
        })
        .collect())
}

pub(crate) fn normalize(scores: [f64; 3]) -> ([f64; 3], bool) {
    let sum: f64 = scores.iter().sum();
    if !(sum > 0.0) {
        return ([1.0 / 3.0; 3], true);
    }
    ([scores[0] / sum, scores[1] / sum, scores[2] / sum], false)
}

//! Candidate policy grid, evaluation of every candidate and the ternary
//! social/ecological/economic balance of the results.

mod grid;
mod svg;
mod table;
mod ternary;

use serde::{Deserialize, Serialize};

use crate::mabs::{simulate_year, AgentConfig, PolicyIndices, PolicyParams, Profiles};
use crate::{Error, Result};

pub use grid::{generate_grid, AxisRange, SweepGrid};
pub use svg::{render_ternary_svg, Highlight};
pub use table::{candidates_csv, read_candidates_csv, ternary_csv};
pub use ternary::{ternary_coords, TernaryPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub params: PolicyParams,
    pub indices: PolicyIndices,
}

/// Evaluated candidates ordered by `k = 1..=l`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CandidateSet {
    pub candidates: Vec<Candidate>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn get(&self, k: usize) -> Option<&Candidate> {
        k.checked_sub(1).and_then(|i| self.candidates.get(i))
    }
}

/// Simulates every candidate. `workers = Some(1)` runs serially on the
/// calling thread; other values use a rayon pool of that size (`None` or 0:
/// rayon's default). Output order is by `k` regardless of scheduling.
pub fn evaluate_all(
    grid: &[PolicyParams],
    profiles: &Profiles,
    config: &AgentConfig,
    workers: Option<usize>,
) -> Result<CandidateSet> {
    let eval = |p: &PolicyParams| -> Result<Candidate> {
        let indices = simulate_year(p, profiles, config).map_err(|e| Error::Candidate {
            k: p.k,
            source: Box::new(e),
        })?;
        Ok(Candidate { params: *p, indices })
    };
    let mut candidates = match workers {
        Some(1) => grid.iter().map(eval).collect::<Result<Vec<_>>>()?,
        Some(n) if n > 1 => {
            use rayon::prelude::*;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
            pool.install(|| grid.par_iter().map(eval).collect::<Result<Vec<_>>>())?
        }
        _ => {
            use rayon::prelude::*;
            grid.par_iter().map(eval).collect::<Result<Vec<_>>>()?
        }
    };
    candidates.sort_by_key(|c| c.params.k);
    if candidates.windows(2).any(|w| w[0].params.k == w[1].params.k) {
        return Err(Error::Domain("duplicate candidate index in grid".into()));
    }
    Ok(CandidateSet { candidates })
}

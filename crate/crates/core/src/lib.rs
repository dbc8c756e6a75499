//! Resident well-being regression, hourly microgrid policy simulation and
//! coupled policy selection.
//!
//! The pipeline runs in four layers:
//!
//! - [`survey`]: complete-case survey ingest, max-normalization, Pearson
//!   screening and an ordinary least squares well-being model.
//! - [`sensor`]: sensor cleansing, donor gap filling and hourly per-unit
//!   generation/demand profiles for a fixed 8,760-hour year.
//! - [`mabs`] and [`sweep`]: hourly dispatch of PV, nano-hydro, battery and
//!   grid agents over a grid of sizing policies, producing cost, renewable
//!   utilization and regional circulation KPIs.
//! - [`coupling`]: KPI-driven modifiers on the regression's explanatory
//!   variables and argmax selection of the best policy per value type.

pub mod coupling;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod mabs;
pub mod sensor;
pub mod stats;
pub mod survey;
pub mod sweep;

pub use error::{Error, Result};

/// Hours in the simulated (non-leap) year.
pub const HOURS_PER_YEAR: usize = 8760;

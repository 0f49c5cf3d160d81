//! Deterministic multi-zone frequency-dynamics simulator for studying
//! load-altering attacks against a grid with battery frequency response
//! and under-frequency load shedding.
//!
//! The usual flow is: load or synthesize a [`grid::NetworkModel`], attach a
//! BESS fleet from [`services::PresetRegistry`], build an
//! [`attack::AttackScenario`], simulate with [`dynamics::run`], and reduce
//! the trace with [`analysis::FrequencyMetrics`]. [`analysis::find_min_laa`]
//! searches for the smallest attack that breaches a frequency limit.

pub mod analysis;
pub mod attack;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod protection;
pub mod report;
pub mod services;

pub use error::{GridError, Result};

//! Multi-zone swing-equation dynamics with governors, BESS response,
//! scheduled load steps and load shedding.
//!
//! Per zone `i` (H·S aggregated over the zone's generators):
//!
//! ```text
//! dδ_i/dt          = 2π Δf_i
//! (2 H_i S_i / f0) dΔf_i/dt = Pm_i + Pbess_i + Pimport_i - Pload_i
//!                    - Σ_j B_ij (δ_i - δ_j) · base - D_i S_i Δf_i / f0
//! T_g dPm_g/dt     = P_set,g - (Δf_zone / f0) S_g / R_g - Pm_g
//! ```
//!
//! Integration is fixed-step RK4. Discrete actions (attack steps, relay
//! trips, BESS controller updates) happen only at step boundaries, and the
//! governor output is clamped to `[0, setpoint + headroom]` after each step.

mod engine;
mod plant;
mod rk4;
mod trace;

pub use engine::{run, run_with_policy, Simulation};
pub use plant::{Plant, StateDerivative};
pub use rk4::Rk4;
pub use trace::{EventKind, Trace, TraceEvent, TraceSample};

use serde::{Deserialize, Serialize};

use crate::error::{GridError, Result};
use crate::services::BessState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    /// Fixed integration step, s.
    pub dt: f64,
    /// Simulated span, s.
    pub horizon: f64,
    /// Integration steps between recorded samples.
    pub sample_every: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            dt: 0.01,
            horizon: 180.0,
            sample_every: 1,
        }
    }
}

impl SimulationConfig {
    pub fn with_horizon(horizon: f64) -> Self {
        SimulationConfig {
            horizon,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(GridError::field("dt", "must be positive"));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return Err(GridError::field("horizon", "must be at least one step"));
        }
        if self.sample_every == 0 {
            return Err(GridError::field("sample_every", "must be >= 1"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

/// Full dynamic state at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub time: f64,
    /// rad per zone.
    pub angle: Vec<f64>,
    /// Hz per zone.
    pub freq_dev: Vec<f64>,
    /// Mechanical power per generator, MW.
    pub gov_power: Vec<f64>,
    pub bess: Vec<BessState>,
    /// Current demand per zone including attack steps and shedding, MW.
    pub load: Vec<f64>,
    pub ufls_latched: bool,
}

impl SystemState {
    pub fn is_finite(&self) -> bool {
        self.angle
            .iter()
            .chain(&self.freq_dev)
            .chain(&self.gov_power)
            .chain(&self.load)
            .all(|v| v.is_finite())
            && self.bess.iter().all(|b| b.delivered.is_finite())
    }
}

//! Battery fast-frequency-response services.
//!
//! Each BESS unit follows a piecewise-linear power/frequency characteristic
//! with a deadband, and delivers through an activation delay followed by a
//! rate-limited ramp. Three service families are provided (containment,
//! moderation, regulation); they differ only in their default curves and
//! are resolved by name through [`ServiceRegistry`].

mod presets;
mod registry;

pub use presets::{FleetPreset, PresetRegistry, DC_ZONES, DR_ZONES};
pub use registry::{FrequencyService, ServiceRegistry};

use serde::{Deserialize, Serialize};

use crate::error::GridError;

pub const DEFAULT_DEADBAND_HZ: f64 = 0.015;
pub const DEFAULT_ACTIVATION_DELAY_S: f64 = 0.5;
pub const DEFAULT_FULL_DELIVERY_S: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ServiceMode {
    #[serde(rename = "DC")]
    DynamicContainment,
    #[serde(rename = "DM")]
    DynamicModeration,
    #[serde(rename = "DR")]
    DynamicRegulation,
}

impl ServiceMode {
    pub fn code(self) -> &'static str {
        match self {
            ServiceMode::DynamicContainment => "DC",
            ServiceMode::DynamicModeration => "DM",
            ServiceMode::DynamicRegulation => "DR",
        }
    }
}

/// Power/frequency characteristic of a dynamic service.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceCurve {
    pub deadband: f64,
    pub full_deviation: f64,
    /// Respond to over-frequency as well as under-frequency.
    pub symmetric: bool,
}

impl ServiceCurve {
    pub fn new(deadband: f64, full_deviation: f64) -> Self {
        ServiceCurve {
            deadband,
            full_deviation,
            symmetric: true,
        }
    }

    pub fn validate(&self, field: &str) -> Result<(), GridError> {
        if !(self.deadband >= 0.0 && self.deadband < self.full_deviation)
            || !self.full_deviation.is_finite()
        {
            return Err(GridError::field(
                field,
                format!(
                    "need 0 <= deadband ({}) < full deviation ({})",
                    self.deadband, self.full_deviation
                ),
            ));
        }
        Ok(())
    }
}

/// Steady-state service output for a frequency deviation.
///
/// Zero inside the deadband, full rating beyond `full_deviation`, linear in
/// between. Positive output is injection, so under-frequency yields a
/// positive target.
pub fn droop_target(curve: &ServiceCurve, rating: f64, freq_dev: f64) -> f64 {
    if !curve.symmetric && freq_dev > 0.0 {
        return 0.0;
    }
    let magnitude = freq_dev.abs();
    if magnitude <= curve.deadband {
        return 0.0;
    }
    let fraction =
        ((magnitude - curve.deadband) / (curve.full_deviation - curve.deadband)).min(1.0);
    -freq_dev.signum() * rating * fraction
}

/// A battery unit providing one dynamic service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BessEntry", into = "BessEntry")]
pub struct BessUnit {
    pub id: String,
    pub zone: String,
    pub rating: f64,
    pub mode: ServiceMode,
    pub curve: ServiceCurve,
    pub activation_delay: f64,
    pub full_delivery_time: f64,
    /// Usable energy throughput; `None` is unbounded.
    pub energy_capacity: Option<f64>,
}

impl BessUnit {
    /// Unit with the default curve and timing for `mode`.
    pub fn with_defaults(
        id: impl Into<String>,
        zone: impl Into<String>,
        rating: f64,
        mode: ServiceMode,
    ) -> Self {
        BessUnit {
            id: id.into(),
            zone: zone.into(),
            rating,
            mode,
            curve: ServiceRegistry::builtin().default_curve(mode),
            activation_delay: DEFAULT_ACTIVATION_DELAY_S,
            full_delivery_time: DEFAULT_FULL_DELIVERY_S,
            energy_capacity: None,
        }
    }

    /// MW per second available once activation has elapsed.
    pub fn ramp_rate(&self) -> f64 {
        self.rating / (self.full_delivery_time - self.activation_delay)
    }

    pub fn validate(&self, field: &str) -> Result<(), GridError> {
        if !(self.rating > 0.0 && self.rating.is_finite()) {
            return Err(GridError::field(
                format!("{field}.rating_mw"),
                "must be positive",
            ));
        }
        self.curve.validate(&format!("{field}.deadband_hz"))?;
        if !(self.activation_delay >= 0.0 && self.activation_delay < self.full_delivery_time) {
            return Err(GridError::field(
                format!("{field}.activation_delay_s"),
                format!(
                    "need 0 <= activation delay ({}) < full delivery time ({})",
                    self.activation_delay, self.full_delivery_time
                ),
            ));
        }
        if let Some(cap) = self.energy_capacity {
            if !(cap > 0.0) {
                return Err(GridError::field(
                    format!("{field}.energy_capacity_mwh"),
                    "must be positive or null",
                ));
            }
        }
        Ok(())
    }
}

/// Wire form of a BESS entry in the network document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BessEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    zone: String,
    rating_mw: f64,
    mode: String,
    #[serde(default)]
    deadband_hz: Option<f64>,
    #[serde(default)]
    full_deviation_hz: Option<f64>,
    #[serde(default)]
    activation_delay_s: Option<f64>,
    #[serde(default)]
    full_delivery_s: Option<f64>,
    #[serde(default)]
    energy_capacity_mwh: Option<f64>,
}

impl TryFrom<BessEntry> for BessUnit {
    type Error = String;

    fn try_from(entry: BessEntry) -> Result<Self, Self::Error> {
        let registry = ServiceRegistry::builtin();
        let service = registry.get(&entry.mode).ok_or_else(|| {
            format!(
                "unknown service mode `{}` (expected DC, DM or DR)",
                entry.mode
            )
        })?;
        let defaults = service.default_curve();
        Ok(BessUnit {
            id: entry.id.unwrap_or_default(),
            zone: entry.zone,
            rating: entry.rating_mw,
            mode: service.mode(),
            curve: ServiceCurve {
                deadband: entry.deadband_hz.unwrap_or(defaults.deadband),
                full_deviation: entry.full_deviation_hz.unwrap_or(defaults.full_deviation),
                symmetric: defaults.symmetric,
            },
            activation_delay: entry
                .activation_delay_s
                .unwrap_or(DEFAULT_ACTIVATION_DELAY_S),
            full_delivery_time: entry.full_delivery_s.unwrap_or(DEFAULT_FULL_DELIVERY_S),
            energy_capacity: entry.energy_capacity_mwh,
        })
    }
}

impl From<BessUnit> for BessEntry {
    fn from(unit: BessUnit) -> Self {
        BessEntry {
            id: (!unit.id.is_empty()).then_some(unit.id),
            zone: unit.zone,
            rating_mw: unit.rating,
            mode: unit.mode.code().to_string(),
            deadband_hz: Some(unit.curve.deadband),
            full_deviation_hz: Some(unit.curve.full_deviation),
            activation_delay_s: Some(unit.activation_delay),
            full_delivery_s: Some(unit.full_delivery_time),
            energy_capacity_mwh: unit.energy_capacity,
        }
    }
}

/// Dynamic state of one unit.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BessState {
    /// MW, positive = injection.
    pub delivered: f64,
    /// Time the deviation first left the deadband; `None` while disarmed.
    pub armed_since: Option<f64>,
    /// MWh of throughput consumed.
    pub energy_used: f64,
}

impl BessState {
    pub fn is_exhausted(&self, unit: &BessUnit) -> bool {
        matches!(unit.energy_capacity, Some(cap) if self.energy_used >= cap)
    }
}

fn move_toward(current: f64, goal: f64, max_change: f64) -> f64 {
    if (goal - current).abs() <= max_change {
        goal
    } else {
        current + (goal - current).signum() * max_change
    }
}

/// Advances a unit's delivery from `now` to `now + dt` toward `target`.
///
/// A nonzero target arms the unit; output stays at zero until the activation
/// delay has elapsed, then ramps at [`BessUnit::ramp_rate`]. A zero target
/// (deviation back inside the deadband) ramps the output down at the same
/// rate and disarms once it reaches zero. Exhausting the energy budget
/// forces the output to zero for the rest of the run.
pub fn update_delivery(
    unit: &BessUnit,
    state: &BessState,
    target: f64,
    now: f64,
    dt: f64,
) -> BessState {
    let mut next = state.clone();
    if state.is_exhausted(unit) {
        next.delivered = 0.0;
        return next;
    }

    let outside = target != 0.0;
    if outside && next.armed_since.is_none() {
        next.armed_since = Some(now);
    }

    match next.armed_since {
        None => next.delivered = 0.0,
        Some(armed_at) => {
            let goal = if outside {
                target.clamp(-unit.rating, unit.rating)
            } else {
                0.0
            };
            // Portion of this step during which the unit may move.
            let active_from = armed_at + unit.activation_delay;
            let active = if !outside || active_from <= now {
                dt
            } else {
                (now + dt - active_from).clamp(0.0, dt)
            };
            next.delivered = move_toward(state.delivered, goal, unit.ramp_rate() * active)
                .clamp(-unit.rating, unit.rating);
            if !outside && next.delivered == 0.0 {
                next.armed_since = None;
            }
        }
    }

    let increment = (0.5 * (state.delivered + next.delivered)).abs() * dt / 3600.0;
    match unit.energy_capacity {
        Some(cap) if next.energy_used + increment >= cap * (1.0 - 1e-12) => {
            next.energy_used = cap;
            next.delivered = 0.0;
        }
        _ => next.energy_used += increment,
    }
    next
}

/// A BESS fleet bound to zone indices of a particular network.
#[derive(Debug, Clone)]
pub struct Fleet {
    units: Vec<BessUnit>,
    zone_of: Vec<usize>,
    n_zones: usize,
}

impl Fleet {
    /// `zone_of[k]` is the zone index hosting `units[k]`.
    pub fn new(units: Vec<BessUnit>, zone_of: Vec<usize>, n_zones: usize) -> Self {
        assert_eq!(units.len(), zone_of.len());
        Fleet {
            units,
            zone_of,
            n_zones,
        }
    }

    pub fn units(&self) -> &[BessUnit] {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn initial_states(&self) -> Vec<BessState> {
        vec![BessState::default(); self.units.len()]
    }

    /// Per-zone sum of current delivered power.
    pub fn injection(&self, states: &[BessState]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_zones];
        for (state, &zone) in states.iter().zip(&self.zone_of) {
            out[zone] += state.delivered;
        }
        out
    }

    /// Advances every unit against its own zone's deviation and returns the
    /// per-zone injection after the update.
    pub fn fleet_injection(
        &self,
        states: &mut [BessState],
        zone_freq_dev: &[f64],
        now: f64,
        dt: f64,
    ) -> Vec<f64> {
        for ((unit, state), &zone) in self.units.iter().zip(states.iter_mut()).zip(&self.zone_of) {
            let target = droop_target(&unit.curve, unit.rating, zone_freq_dev[zone]);
            *state = update_delivery(unit, state, target, now, dt);
        }
        self.injection(states)
    }
}

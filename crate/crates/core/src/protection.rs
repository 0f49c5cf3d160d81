//! Operating-band classification and the single-stage UFLS relay.

use serde::{Deserialize, Serialize};

use crate::dynamics::{SystemState, Trace};
use crate::error::{GridError, Result};
use crate::grid::NetworkModel;

const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtectionPolicy {
    /// Half-width of the normal operating band, Hz.
    pub normal_band: f64,
    /// Half-width of the statutory band, Hz.
    pub statutory_band: f64,
    /// Load shedding fires at or below this COI frequency, Hz.
    pub ufls_threshold: f64,
    pub shed_fraction: f64,
    /// Seconds the frequency must stay at or below the threshold.
    pub ufls_confirm: f64,
    /// p.u./s on the nominal frequency.
    pub rocof_limit: f64,
    /// Seconds a RoCoF exceedance must persist to count as a violation.
    pub rocof_window: f64,
}

impl Default for ProtectionPolicy {
    fn default() -> Self {
        ProtectionPolicy {
            normal_band: 0.2,
            statutory_band: 0.5,
            ufls_threshold: 48.8,
            shed_fraction: 0.05,
            ufls_confirm: 0.1,
            rocof_limit: 0.0025,
            rocof_window: 0.5,
        }
    }
}

impl ProtectionPolicy {
    pub fn validate(&self, nominal_freq: f64) -> Result<()> {
        if !(self.normal_band > 0.0 && self.normal_band < self.statutory_band) {
            return Err(GridError::field(
                "protection.normal_band",
                "need 0 < normal band < statutory band",
            ));
        }
        if !(self.ufls_threshold < nominal_freq - self.statutory_band) {
            return Err(GridError::field(
                "protection.ufls_threshold",
                "must lie below the statutory band",
            ));
        }
        if !(self.shed_fraction > 0.0 && self.shed_fraction < 1.0) {
            return Err(GridError::field(
                "protection.shed_fraction",
                "must lie in (0, 1)",
            ));
        }
        if !(self.ufls_confirm >= 0.0 && self.rocof_limit > 0.0 && self.rocof_window > 0.0) {
            return Err(GridError::field(
                "protection",
                "confirm delay, RoCoF limit and RoCoF window must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RelayState {
    pub below_since: Option<f64>,
    /// Latched for the rest of the run once set.
    pub tripped: bool,
}

/// Advances the relay with the COI frequency sampled at `now`. Returns the new
/// state and whether this call tripped it.
pub fn ufls_update(
    policy: &ProtectionPolicy,
    relay: RelayState,
    coi_freq: f64,
    now: f64,
) -> (RelayState, bool) {
    if relay.tripped {
        return (relay, false);
    }
    if coi_freq > policy.ufls_threshold {
        return (
            RelayState {
                below_since: None,
                tripped: false,
            },
            false,
        );
    }
    let since = relay.below_since.unwrap_or(now);
    let trip = now - since >= policy.ufls_confirm - TIME_EPS;
    (
        RelayState {
            below_since: Some(since),
            tripped: trip,
        },
        trip,
    )
}

/// Per-zone MW removed by one shedding stage: the policy fraction of base
/// demand, capped by each zone's sheddable fraction.
pub fn shedding_amounts(model: &NetworkModel, policy: &ProtectionPolicy) -> Vec<f64> {
    model
        .zones
        .iter()
        .map(|z| z.demand * policy.shed_fraction.min(z.sheddable_fraction))
        .collect()
}

/// Sheds load after a trip. A no-op when shedding was already applied.
pub fn apply_shedding(
    model: &NetworkModel,
    state: &SystemState,
    policy: &ProtectionPolicy,
) -> SystemState {
    let mut next = state.clone();
    if state.ufls_latched {
        return next;
    }
    for (load, shed) in next.load.iter_mut().zip(shedding_amounts(model, policy)) {
        *load = (*load - shed).max(0.0);
    }
    next.ufls_latched = true;
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExcursionBand {
    WithinNormal,
    OutsideNormal,
    OutsideStatutory,
    LoadShedding,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationReport {
    /// Most severe band breached.
    pub band: ExcursionBand,
    pub normal_crossing: Option<f64>,
    pub statutory_crossing: Option<f64>,
    pub ufls_crossing: Option<f64>,
    pub rocof_violation: bool,
    /// Start of the first sustained RoCoF exceedance.
    pub rocof_violation_start: Option<f64>,
}

/// Classifies the COI excursion of a trace against the operating bands.
///
/// RoCoF is the slope between consecutive samples; a violation needs the
/// limit exceeded continuously for longer than `rocof_window`.
pub fn classify_excursion(trace: &Trace, policy: &ProtectionPolicy) -> Result<ViolationReport> {
    if trace.samples.is_empty() {
        return Err(GridError::Trace("empty trace".into()));
    }
    let f0 = trace.nominal_freq;
    let first = |pred: &dyn Fn(f64) -> bool| {
        trace
            .samples
            .iter()
            .find(|s| pred(s.coi_freq))
            .map(|s| s.time)
    };
    let normal_crossing = first(&|f| (f - f0).abs() > policy.normal_band);
    let statutory_crossing = first(&|f| (f - f0).abs() > policy.statutory_band);
    let ufls_crossing = first(&|f| f <= policy.ufls_threshold);
    let band = if ufls_crossing.is_some() {
        ExcursionBand::LoadShedding
    } else if statutory_crossing.is_some() {
        ExcursionBand::OutsideStatutory
    } else if normal_crossing.is_some() {
        ExcursionBand::OutsideNormal
    } else {
        ExcursionBand::WithinNormal
    };

    let mut rocof_violation_start = None;
    let mut run_start: Option<f64> = None;
    for pair in trace.samples.windows(2) {
        let slope = (pair[1].coi_freq - pair[0].coi_freq) / (pair[1].time - pair[0].time) / f0;
        if slope.abs() > policy.rocof_limit {
            let start = *run_start.get_or_insert(pair[0].time);
            if pair[1].time - start > policy.rocof_window + TIME_EPS {
                rocof_violation_start = Some(start);
                break;
            }
        } else {
            run_start = None;
        }
    }

    Ok(ViolationReport {
        band,
        normal_crossing,
        statutory_crossing,
        ufls_crossing,
        rocof_violation: rocof_violation_start.is_some(),
        rocof_violation_start,
    })
}

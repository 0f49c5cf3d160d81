use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::AdversarySpec;
use crate::error::{GridError, Result};
use crate::protection::ProtectionPolicy;

/// A load change applied at one zone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackStep {
    #[serde(rename = "time_s")]
    pub time: f64,
    pub zone: String,
    /// MW, positive = load increase.
    #[serde(rename = "delta_mw")]
    pub delta: f64,
}

/// Time-ordered sequence of load steps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackScenario {
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub steps: Vec<AttackStep>,
}

impl AttackScenario {
    pub fn empty(label: impl Into<String>) -> Self {
        AttackScenario {
            label: label.into(),
            steps: Vec::new(),
        }
    }

    pub fn total_magnitude(&self) -> f64 {
        self.steps.iter().map(|s| s.delta).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, step) in self.steps.iter().enumerate() {
            if !(step.time >= 0.0 && step.time.is_finite()) {
                return Err(GridError::Scenario(format!(
                    "steps[{i}].time_s must be finite and >= 0"
                )));
            }
            if !step.delta.is_finite() {
                return Err(GridError::Scenario(format!(
                    "steps[{i}].delta_mw must be finite"
                )));
            }
        }
        if self.steps.windows(2).any(|w| w[1].time < w[0].time) {
            return Err(GridError::Scenario("steps must be sorted by time".into()));
        }
        Ok(())
    }
}

fn check_magnitude(magnitude: f64) -> Result<()> {
    if magnitude == 0.0 || !magnitude.is_finite() {
        return Err(GridError::Scenario(format!(
            "attack magnitude must be finite and nonzero, got {magnitude}"
        )));
    }
    Ok(())
}

/// Single simultaneous load step.
pub fn static_laa(zone: &str, magnitude: f64, t0: f64) -> Result<AttackScenario> {
    check_magnitude(magnitude)?;
    let scenario = AttackScenario {
        label: format!("static {magnitude} MW at {zone}"),
        steps: vec![AttackStep {
            time: t0,
            zone: zone.to_string(),
            delta: magnitude,
        }],
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Same total change split into equal steps at `times`; the last step absorbs
/// rounding so the deltas sum to `magnitude`.
pub fn dynamic_laa(zone: &str, magnitude: f64, times: &[f64]) -> Result<AttackScenario> {
    check_magnitude(magnitude)?;
    if times.is_empty() {
        return Err(GridError::Scenario(
            "dynamic attack needs at least one step time".into(),
        ));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GridError::Scenario(
            "step times must be strictly increasing".into(),
        ));
    }
    let each = magnitude / times.len() as f64;
    let mut steps: Vec<AttackStep> = times
        .iter()
        .map(|&time| AttackStep {
            time,
            zone: zone.to_string(),
            delta: each,
        })
        .collect();
    let head: f64 = steps[..steps.len() - 1].iter().map(|s| s.delta).sum();
    steps.last_mut().unwrap().delta = magnitude - head;
    let scenario = AttackScenario {
        label: format!("dynamic {magnitude} MW at {zone} in {} steps", times.len()),
        steps,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Per-zone right-continuous staircase of cumulative attack load.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfile {
    /// Breakpoints `(time, cumulative MW)` per zone, in time order.
    zones: BTreeMap<String, Vec<(f64, f64)>>,
}

impl LoadProfile {
    pub fn value(&self, zone: &str, t: f64) -> f64 {
        self.zones
            .get(zone)
            .and_then(|points| points.iter().take_while(|(time, _)| *time <= t).last())
            .map_or(0.0, |(_, level)| *level)
    }

    pub fn total(&self, t: f64) -> f64 {
        self.zones.keys().map(|z| self.value(z, t)).sum()
    }

    pub fn final_total(&self) -> f64 {
        self.zones
            .values()
            .map(|points| points.last().map_or(0.0, |p| p.1))
            .sum()
    }

    pub fn zones(&self) -> impl Iterator<Item = &str> {
        self.zones.keys().map(String::as_str)
    }
}

/// Snaps a step time to the first integration boundary at or after it.
pub fn boundary_index(time: f64, dt: f64) -> usize {
    (time / dt - 1e-6).ceil().max(0.0) as usize
}

/// Load-delta staircase as the engine applies it on a `dt` grid.
pub fn scenario_to_profile(
    scenario: &AttackScenario,
    horizon: f64,
    dt: f64,
) -> Result<LoadProfile> {
    scenario.validate()?;
    let mut zones: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for step in &scenario.steps {
        if step.time >= horizon {
            return Err(GridError::Scenario(format!(
                "step at {} s lies beyond the {horizon} s horizon",
                step.time
            )));
        }
        let at = boundary_index(step.time, dt) as f64 * dt;
        let points = zones.entry(step.zone.clone()).or_default();
        let level = points.last().map_or(0.0, |p| p.1) + step.delta;
        match points.last_mut() {
            Some(last) if last.0 == at => last.1 = level,
            _ => points.push((at, level)),
        }
    }
    Ok(LoadProfile { zones })
}

/// Scenario document: explicit steps and/or an adversary, plus optional
/// protection overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub steps: Vec<AttackStep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversary: Option<AdversarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protection: Option<ProtectionPolicy>,
}

impl ScenarioFile {
    pub fn parse(document: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(document);
        let file: ScenarioFile =
            serde_path_to_error::deserialize(de).map_err(|err| GridError::Schema {
                path: err.path().to_string(),
                message: err.inner().to_string(),
            })?;
        file.scenario().validate()?;
        Ok(file)
    }

    pub fn scenario(&self) -> AttackScenario {
        AttackScenario {
            label: self.label.clone(),
            steps: self.steps.clone(),
        }
    }
}

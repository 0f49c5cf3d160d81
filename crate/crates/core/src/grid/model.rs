use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{GridError, Result};
use crate::services::BessUnit;

fn default_sheddable() -> f64 {
    0.05
}
fn default_droop() -> f64 {
    0.05
}
fn default_governor_tc() -> f64 {
    8.0
}
fn default_damping() -> f64 {
    1.0
}
fn default_base_mva() -> f64 {
    100.0
}
fn default_nominal_freq() -> f64 {
    50.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Zone {
    pub id: String,
    /// MW.
    pub demand: f64,
    /// Portion of demand eligible for under-frequency shedding.
    #[serde(default = "default_sheddable")]
    pub sheddable_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub from: String,
    pub to: String,
    /// Per unit on the system base.
    pub susceptance: f64,
    /// MW, informational only.
    #[serde(default)]
    pub rating: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncGenerator {
    pub zone: String,
    /// MVA.
    pub rating: f64,
    /// Inertia constant H, seconds.
    pub inertia_h: f64,
    #[serde(default = "default_droop")]
    pub droop: f64,
    /// First-order turbine-governor time constant, seconds.
    #[serde(default = "default_governor_tc")]
    pub governor_tc: f64,
    /// Spinning reserve above dispatch, MW.
    #[serde(default)]
    pub headroom: f64,
    #[serde(default = "default_damping")]
    pub damping: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interconnector {
    pub zone: String,
    /// MW, positive = import.
    pub injection: f64,
}

/// Static description of a multi-zone network.
///
/// Immutable once validated; simulations borrow it and may share it across
/// threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkModel {
    #[serde(default = "default_base_mva")]
    pub base_mva: f64,
    #[serde(default = "default_nominal_freq")]
    pub nominal_freq: f64,
    pub zones: Vec<Zone>,
    #[serde(default)]
    pub lines: Vec<Line>,
    #[serde(default)]
    pub generators: Vec<SyncGenerator>,
    #[serde(default)]
    pub interconnectors: Vec<Interconnector>,
    #[serde(rename = "bess", default)]
    pub bess_fleet: Vec<BessUnit>,
}

/// Parses and validates a network document.
pub fn load_network(document: &str) -> Result<NetworkModel> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let model: NetworkModel =
        serde_path_to_error::deserialize(de).map_err(|err| GridError::Schema {
            path: err.path().to_string(),
            message: err.inner().to_string(),
        })?;
    model.validate()?;
    Ok(model)
}

fn positive(value: f64, field: impl FnOnce() -> String) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(GridError::field(
            field(),
            format!("must be positive, got {value}"),
        ))
    }
}

fn non_negative(value: f64, field: impl FnOnce() -> String) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(GridError::field(
            field(),
            format!("must be >= 0, got {value}"),
        ))
    }
}

impl NetworkModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network model serializes")
    }

    pub fn zone_index(&self) -> HashMap<&str, usize> {
        self.zones
            .iter()
            .enumerate()
            .map(|(i, z)| (z.id.as_str(), i))
            .collect()
    }

    pub fn zone_position(&self, id: &str) -> Option<usize> {
        self.zones.iter().position(|z| z.id == id)
    }

    pub fn total_demand(&self) -> f64 {
        self.zones.iter().map(|z| z.demand).sum()
    }

    pub fn total_imports(&self) -> f64 {
        self.interconnectors.iter().map(|ic| ic.injection).sum()
    }

    pub fn total_capacity(&self) -> f64 {
        self.generators.iter().map(|g| g.rating).sum()
    }

    /// Sum of H·S over all generators, MVA·s.
    pub fn total_inertia(&self) -> f64 {
        self.generators.iter().map(|g| g.inertia_h * g.rating).sum()
    }

    /// Checks every structural and parameter invariant.
    pub fn validate(&self) -> Result<()> {
        positive(self.base_mva, || "base_mva".into())?;
        positive(self.nominal_freq, || "nominal_freq".into())?;
        if self.zones.is_empty() {
            return Err(GridError::field("zones", "at least one zone is required"));
        }

        let mut index = HashMap::new();
        for (i, zone) in self.zones.iter().enumerate() {
            if index.insert(zone.id.as_str(), i).is_some() {
                return Err(GridError::DuplicateZone(zone.id.clone()));
            }
            non_negative(zone.demand, || format!("zones[{i}].demand"))?;
            if !(0.0..=1.0).contains(&zone.sheddable_fraction) {
                return Err(GridError::field(
                    format!("zones[{i}].sheddable_fraction"),
                    "must lie in [0, 1]",
                ));
            }
        }
        let lookup = |kind: &'static str, zone: &str| -> Result<usize> {
            index
                .get(zone)
                .copied()
                .ok_or_else(|| GridError::DanglingZone {
                    kind,
                    zone: zone.to_string(),
                })
        };

        for (i, line) in self.lines.iter().enumerate() {
            lookup("line", &line.from)?;
            lookup("line", &line.to)?;
            if line.from == line.to {
                return Err(GridError::field(
                    format!("lines[{i}].to"),
                    format!("line connects zone `{}` to itself", line.from),
                ));
            }
            positive(line.susceptance, || format!("lines[{i}].susceptance"))?;
        }

        let mut hosted = vec![false; self.zones.len()];
        for (i, g) in self.generators.iter().enumerate() {
            hosted[lookup("generator", &g.zone)?] = true;
            positive(g.rating, || format!("generators[{i}].rating"))?;
            positive(g.inertia_h, || format!("generators[{i}].inertia_h"))?;
            if !(g.droop > 0.0 && g.droop <= 1.0) {
                return Err(GridError::field(
                    format!("generators[{i}].droop"),
                    "must lie in (0, 1]",
                ));
            }
            positive(g.governor_tc, || format!("generators[{i}].governor_tc"))?;
            non_negative(g.headroom, || format!("generators[{i}].headroom"))?;
            non_negative(g.damping, || format!("generators[{i}].damping"))?;
        }

        for (i, ic) in self.interconnectors.iter().enumerate() {
            lookup("interconnector", &ic.zone)?;
            if !ic.injection.is_finite() {
                return Err(GridError::field(
                    format!("interconnectors[{i}].injection"),
                    "must be finite",
                ));
            }
        }

        for (i, unit) in self.bess_fleet.iter().enumerate() {
            lookup("BESS", &unit.zone)?;
            unit.validate(&format!("bess[{i}]"))?;
        }

        self.check_connected()?;

        let demand = self.total_demand();
        let generation = self.total_capacity();
        let imports = self.total_imports();
        if generation + imports < demand || demand - imports < 0.0 {
            return Err(GridError::CapacityShortfall {
                demand,
                generation,
                imports,
            });
        }

        if let Some(i) = hosted.iter().position(|h| !h) {
            return Err(GridError::ZeroInertiaZone(self.zones[i].id.clone()));
        }
        Ok(())
    }

    fn check_connected(&self) -> Result<()> {
        let index = self.zone_index();
        let n = self.zones.len();
        let mut adjacency = vec![Vec::new(); n];
        for line in &self.lines {
            let (a, b) = (index[line.from.as_str()], index[line.to.as_str()]);
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            for &j in &adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(GridError::Disconnected(self.zones[i].id.clone())),
            None => Ok(()),
        }
    }
}

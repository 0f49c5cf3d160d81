use std::collections::BTreeMap;

use super::{BessUnit, ServiceMode};
use crate::error::{GridError, Result};
use crate::grid::NetworkModel;

/// Zones hosting the regulation units of the reference fleet.
pub const DR_ZONES: [&str; 5] = ["Z1", "Z8", "Z20", "Z25A", "Z27W"];
/// Zones hosting the containment units of the reference fleet.
pub const DC_ZONES: [&str; 5] = ["Z3", "Z8", "Z9", "Z15", "Z25"];

/// Builds a BESS fleet for a network. Registered by name in [`PresetRegistry`].
pub trait FleetPreset: Send + Sync {
    fn name(&self) -> &str;

    fn units(&self) -> Vec<BessUnit>;

    /// Fleet for `model`, failing if a placement zone is missing.
    fn build(&self, model: &NetworkModel) -> Result<Vec<BessUnit>> {
        let units = self.units();
        for unit in &units {
            if !model.zones.iter().any(|z| z.id == unit.zone) {
                return Err(GridError::DanglingZone {
                    kind: "BESS preset",
                    zone: unit.zone.clone(),
                });
            }
        }
        Ok(units)
    }

    /// Copy of `model` with its fleet replaced by this preset.
    fn apply(&self, model: &NetworkModel) -> Result<NetworkModel> {
        let mut out = model.clone();
        out.bess_fleet = self.build(model)?;
        Ok(out)
    }
}

struct NoBess;

impl FleetPreset for NoBess {
    fn name(&self) -> &str {
        "none"
    }

    fn units(&self) -> Vec<BessUnit> {
        Vec::new()
    }
}

/// Equal-rated units spread over fixed placements, per service mode.
struct PlacedFleet {
    name: String,
    groups: Vec<(ServiceMode, Vec<&'static str>, f64)>,
}

impl FleetPreset for PlacedFleet {
    fn name(&self) -> &str {
        &self.name
    }

    fn units(&self) -> Vec<BessUnit> {
        let mut units = Vec::new();
        for (mode, zones, total_mw) in &self.groups {
            let each = total_mw / zones.len() as f64;
            for zone in zones {
                let id = format!("{}_{}", mode.code(), zone);
                units.push(BessUnit::with_defaults(id, *zone, each, *mode));
            }
        }
        units
    }
}

pub struct PresetRegistry {
    presets: BTreeMap<String, Box<dyn FleetPreset>>,
}

impl PresetRegistry {
    pub fn empty() -> Self {
        PresetRegistry {
            presets: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, preset: Box<dyn FleetPreset>) {
        self.presets.insert(preset.name().to_string(), preset);
    }

    /// `none`, the equal-mix reference fleets `paper-400|500|600`, the
    /// single-mode `paper-500-dc|dr`, and `colocated-500` (all units in Z8).
    pub fn builtin() -> Self {
        let mut registry = PresetRegistry::empty();
        registry.register(Box::new(NoBess));
        for size in [400.0, 500.0, 600.0] {
            registry.register(Box::new(PlacedFleet {
                name: format!("paper-{size}"),
                groups: vec![
                    (
                        ServiceMode::DynamicRegulation,
                        DR_ZONES.to_vec(),
                        size / 2.0,
                    ),
                    (
                        ServiceMode::DynamicContainment,
                        DC_ZONES.to_vec(),
                        size / 2.0,
                    ),
                ],
            }));
        }
        registry.register(Box::new(PlacedFleet {
            name: "paper-500-dc".into(),
            groups: vec![(ServiceMode::DynamicContainment, DC_ZONES.to_vec(), 500.0)],
        }));
        registry.register(Box::new(PlacedFleet {
            name: "paper-500-dr".into(),
            groups: vec![(ServiceMode::DynamicRegulation, DR_ZONES.to_vec(), 500.0)],
        }));
        registry.register(Box::new(PlacedFleet {
            name: "colocated-500".into(),
            groups: vec![
                (ServiceMode::DynamicRegulation, vec!["Z8"], 250.0),
                (ServiceMode::DynamicContainment, vec!["Z8"], 250.0),
            ],
        }));
        registry
    }

    pub fn get(&self, name: &str) -> Result<&dyn FleetPreset> {
        self.presets
            .get(name)
            .map(|p| p.as_ref())
            .ok_or_else(|| GridError::UnknownName {
                kind: "BESS preset",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.presets.keys().map(String::as_str)
    }
}

impl Default for PresetRegistry {
    fn default() -> Self {
        PresetRegistry::builtin()
    }
}

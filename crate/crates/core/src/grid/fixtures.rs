//! Shipped reference networks.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{load_network, NetworkModel};

pub const TWO_ZONE_JSON: &str = include_str!("../../data/two-zone.json");
pub const FIVE_ZONE_JSON: &str = include_str!("../../data/five-zone.json");
pub const GB36_SYNTHETIC_JSON: &str = include_str!("../../data/gb36-synthetic.json");

/// Two 1,000 MVA zones (H = 5 s each, so the system holds 10,000 MVA·s).
pub fn two_zone() -> NetworkModel {
    load_network(TWO_ZONE_JSON).expect("shipped two-zone fixture is valid")
}

pub fn five_zone() -> NetworkModel {
    load_network(FIVE_ZONE_JSON).expect("shipped five-zone fixture is valid")
}

/// The canonical synthetic GB-36 network (seed 1).
pub fn gb36_synthetic() -> NetworkModel {
    load_network(GB36_SYNTHETIC_JSON).expect("shipped gb36 fixture is valid")
}

/// Two-zone fixture with governor, damping, headroom and line parameters
/// redrawn from `seed`. The inertia is left untouched.
pub fn two_zone_calibrated(seed: u64) -> NetworkModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = two_zone();
    for line in &mut model.lines {
        line.susceptance = rng.random_range(5.0..50.0);
    }
    for g in &mut model.generators {
        g.droop = rng.random_range(0.03..0.08);
        g.governor_tc = rng.random_range(4.0..12.0);
        g.damping = rng.random_range(0.5..2.0);
        g.headroom = rng.random_range(20.0..150.0);
    }
    model
}

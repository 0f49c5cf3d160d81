//! Seeded synthetic analogue of the 36-zone GB transmission model.
//!
//! Matches the published aggregate statistics (36 zones, 69 lines, 76
//! synchronous generators, 8 interconnectors, ~40 GW demand with Z8 the
//! largest at 3,669.5 MW, H = 5 s everywhere). Everything else is drawn from
//! a ChaCha stream so the output is a pure function of the seed.

use std::collections::BTreeSet;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Interconnector, Line, NetworkModel, SyncGenerator, Zone};

pub const GB36_TOTAL_DEMAND_MW: f64 = 40_000.0;
pub const GB36_PEAK_ZONE: &str = "Z8";
pub const GB36_PEAK_DEMAND_MW: f64 = 3_669.5;
pub const GB36_LINES: usize = 69;
pub const GB36_GENERATORS: usize = 76;

const TOTAL_CAPACITY_MVA: f64 = 42_000.0;
const HEADROOM_FRACTION: f64 = 0.02;
const INTERCONNECTOR_ZONES: [&str; 8] = ["Z1", "Z4", "Z11", "Z13", "Z17", "Z22", "Z28", "Z33"];
const NET_IMPORT_MW: f64 = 2_000.0;

/// Zone labels in ring order, including the split zones 25A, 27E and 27W.
pub fn gb36_zone_labels() -> Vec<String> {
    let mut labels: Vec<String> = (1..=25).map(|i| format!("Z{i}")).collect();
    labels.push("Z25A".into());
    labels.push("Z26".into());
    labels.push("Z27E".into());
    labels.push("Z27W".into());
    labels.extend((28..=34).map(|i| format!("Z{i}")));
    labels
}

/// Rounds to `step` (a power of ten) so the result prints as a short decimal.
fn round_to(value: f64, step: f64) -> f64 {
    let inv = (1.0 / step).round();
    (value * inv).round() / inv
}

pub fn synthesize_gb36(seed: u64) -> NetworkModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = gb36_zone_labels();
    let n = labels.len();
    let peak = labels.iter().position(|l| l == GB36_PEAK_ZONE).unwrap();

    // Demand: Z8 pinned, the rest share the remainder with bounded spread.
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.35..1.65)).collect();
    let others: f64 = weights
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != peak)
        .map(|(_, w)| w)
        .sum();
    let remainder = GB36_TOTAL_DEMAND_MW - GB36_PEAK_DEMAND_MW;
    let mut demand: Vec<f64> = weights
        .iter()
        .map(|w| round_to(remainder * w / others, 0.1))
        .collect();
    demand[peak] = GB36_PEAK_DEMAND_MW;
    let last = if peak == n - 1 { n - 2 } else { n - 1 };
    let assigned: f64 = demand
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != last)
        .map(|(_, d)| d)
        .sum();
    demand[last] = round_to(GB36_TOTAL_DEMAND_MW - assigned, 0.1);

    let zones: Vec<Zone> = labels
        .iter()
        .zip(&demand)
        .map(|(id, &d)| Zone {
            id: id.clone(),
            demand: d,
            sheddable_fraction: 0.05,
        })
        .collect();

    // Ring backbone plus random chords up to the published line count.
    let mut pairs: BTreeSet<(usize, usize)> = (0..n).map(|i| ordered(i, (i + 1) % n)).collect();
    let mut order: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    while order.len() < GB36_LINES {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b || !pairs.insert(ordered(a, b)) {
            continue;
        }
        order.push((a, b));
    }
    let lines = order
        .into_iter()
        .map(|(a, b)| Line {
            from: labels[a].clone(),
            to: labels[b].clone(),
            susceptance: round_to(rng.random_range(5.0..50.0), 0.01),
            rating: 2_000.0,
        })
        .collect();

    // One generator per zone, the remainder placed in proportion to demand.
    let mut hosts: Vec<usize> = (0..n).collect();
    while hosts.len() < GB36_GENERATORS {
        let mut pick = rng.random_range(0.0..GB36_TOTAL_DEMAND_MW);
        let mut zone = 0;
        while pick >= demand[zone] && zone < n - 1 {
            pick -= demand[zone];
            zone += 1;
        }
        hosts.push(zone);
    }
    hosts.sort_unstable();

    let zone_share: Vec<f64> = demand
        .iter()
        .map(|d| d * rng.random_range(0.4..1.6))
        .collect();
    let unit_weight: Vec<f64> = hosts.iter().map(|_| rng.random_range(0.6..1.4)).collect();
    let mut per_zone_weight = vec![0.0; n];
    for (&z, &w) in hosts.iter().zip(&unit_weight) {
        per_zone_weight[z] += w;
    }
    let share_total: f64 = zone_share.iter().sum();
    let raw: Vec<f64> = hosts
        .iter()
        .zip(&unit_weight)
        .map(|(&z, &w)| TOTAL_CAPACITY_MVA * zone_share[z] / share_total * w / per_zone_weight[z])
        .collect();
    let mut ratings: Vec<f64> = raw.iter().map(|r| round_to(*r, 0.1)).collect();
    let drift = TOTAL_CAPACITY_MVA - ratings.iter().sum::<f64>();
    let biggest = (0..ratings.len())
        .max_by(|&a, &b| ratings[a].total_cmp(&ratings[b]))
        .unwrap();
    ratings[biggest] = round_to(ratings[biggest] + drift, 0.1);

    let generators = hosts
        .iter()
        .zip(&ratings)
        .map(|(&z, &rating)| SyncGenerator {
            zone: labels[z].clone(),
            rating,
            inertia_h: 5.0,
            droop: 0.05,
            governor_tc: 8.0,
            headroom: round_to(HEADROOM_FRACTION * rating, 0.01),
            damping: 1.0,
        })
        .collect();

    let interconnectors = INTERCONNECTOR_ZONES
        .iter()
        .map(|z| Interconnector {
            zone: z.to_string(),
            injection: NET_IMPORT_MW / INTERCONNECTOR_ZONES.len() as f64,
        })
        .collect();

    NetworkModel {
        base_mva: 100.0,
        nominal_freq: 50.0,
        zones,
        lines,
        generators,
        interconnectors,
        bess_fleet: Vec::new(),
    }
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

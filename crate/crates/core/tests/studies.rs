use gridlaa_core::analysis::{
    find_min_laa, nadir, sweep_tables, FrequencyMetrics, MetricOptions, SweepSpec,
};
use gridlaa_core::attack::{
    dynamic_laa, feedback_adversary, static_laa, AdversarySpec, AttackScenario, StrategyRegistry,
    DYNAMIC_STEP_TIMES,
};
use gridlaa_core::dynamics::{run, SimulationConfig};
use gridlaa_core::grid::{fixtures, NetworkModel};
use gridlaa_core::protection::ProtectionPolicy;
use gridlaa_core::services::PresetRegistry;

fn short() -> SimulationConfig {
    SimulationConfig {
        dt: 0.01,
        horizon: 40.0,
        sample_every: 5,
    }
}

fn breaches(model: &NetworkModel, zone: &str, magnitude: f64, limit: f64) -> bool {
    let scenario = if magnitude == 0.0 {
        AttackScenario::empty("none")
    } else {
        static_laa(zone, magnitude, 1.0).unwrap()
    };
    nadir(&run(model, &scenario, short()).unwrap()).unwrap().0 < limit
}

/// First integer magnitude that breaches, by exhaustive 1 MW stepping.
fn brute_force(model: &NetworkModel, zone: &str, limit: f64, max: usize) -> f64 {
    (0..=max)
        .map(|m| m as f64)
        .find(|&m| breaches(model, zone, m, limit))
        .expect("breach within range")
}

#[test]
fn bisection_agrees_with_exhaustive_sweep() {
    let cases = [
        (fixtures::two_zone(), "A", 49.8),
        (fixtures::two_zone(), "B", 49.9),
        (fixtures::five_zone(), "N2", 49.8),
    ];
    for (model, zone, limit) in cases {
        let oracle = brute_force(&model, zone, limit, 2000);
        let r = find_min_laa(&model, zone, limit, (0.0, 2000.0), 1.0, short()).unwrap();
        assert!(
            (r.min_laa - oracle).abs() <= 1.0,
            "{zone}@{limit}: bisection {} vs sweep {oracle}",
            r.min_laa
        );
        assert!(breaches(&model, zone, r.min_laa, limit));
        assert!(!breaches(&model, zone, r.min_laa - 1.0, limit));
    }
}

#[test]
fn reference_fleet_raises_the_threshold() {
    let model = fixtures::gb36_synthetic();
    let config = SimulationConfig {
        dt: 0.01,
        horizon: 60.0,
        sample_every: 10,
    };
    let fleet = PresetRegistry::builtin()
        .get("paper-500")
        .unwrap()
        .apply(&model)
        .unwrap();
    let bare = find_min_laa(&model, "Z8", 49.8, (0.0, 4000.0), 1.0, config).unwrap();
    let with = find_min_laa(&fleet, "Z8", 49.8, (0.0, 4000.0), 1.0, config).unwrap();
    assert!(
        bare.min_laa < with.min_laa,
        "{} vs {}",
        bare.min_laa,
        with.min_laa
    );
}

#[test]
fn staged_attack_settles_where_the_static_one_does() {
    let model = fixtures::five_zone();
    let config = SimulationConfig {
        dt: 0.01,
        horizon: 90.0,
        sample_every: 10,
    };
    let opts = MetricOptions::default();
    let s = run(&model, &static_laa("N3", 150.0, 1.0).unwrap(), config).unwrap();
    let d = run(
        &model,
        &dynamic_laa("N3", 150.0, &DYNAMIC_STEP_TIMES).unwrap(),
        config,
    )
    .unwrap();
    let ms = FrequencyMetrics::from_trace(&s, &opts).unwrap();
    let md = FrequencyMetrics::from_trace(&d, &opts).unwrap();
    assert!((ms.settling_freq - md.settling_freq).abs() < 0.01);
    assert!(md.nadir >= ms.nadir - 1e-9);
}

#[test]
fn adversary_reaches_target_within_budget_on_gb36() {
    let model = fixtures::gb36_synthetic();
    let spec = AdversarySpec::new("LowBudgetDynamic", 2000.0, 49.8, &["Z8", "Z1", "Z15"]);
    let out = feedback_adversary(
        &model,
        &spec,
        SimulationConfig {
            dt: 0.01,
            horizon: 60.0,
            sample_every: 10,
        },
        ProtectionPolicy::default(),
        &StrategyRegistry::builtin(),
    )
    .unwrap();
    assert!(out.achieved);
    assert!(out.scenario.total_magnitude() <= 2000.0 + 1e-9);
    assert!(out.observed_nadir < 49.8);
}

fn location_spec() -> SweepSpec {
    SweepSpec::parse(
        r#"{"label": "location", "cells": [{
            "bess": "paper-500",
            "zones": ["Z8", "Z1", "Z15", "Z20", "Z27W"],
            "study": {"kind": "fixed", "magnitude_mw": 880.68}
        }]}"#,
    )
    .unwrap()
}

#[test]
fn location_sweep_rows() {
    let model = fixtures::gb36_synthetic();
    let config = SimulationConfig {
        dt: 0.01,
        horizon: 180.0,
        sample_every: 10,
    };
    let table = sweep_tables(
        &model,
        &location_spec(),
        config,
        ProtectionPolicy::default(),
        &PresetRegistry::builtin(),
    );
    assert_eq!(table.rows.len(), 5);
    let metrics: Vec<&FrequencyMetrics> = table
        .rows
        .iter()
        .map(|r| r.metrics.as_ref().unwrap())
        .collect();
    let settle: Vec<f64> = metrics.iter().map(|m| m.settling_freq).collect();
    let spread = settle.iter().cloned().fold(f64::MIN, f64::max)
        - settle.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 0.02, "{settle:?}");
    let rocof: Vec<f64> = metrics.iter().map(|m| m.max_rocof_zonal.abs()).collect();
    assert!(
        rocof.windows(2).any(|w| (w[0] - w[1]).abs() > 1e-6),
        "{rocof:?}"
    );
}

#[test]
fn sweep_rows_are_reproducible_in_isolation() {
    let model = fixtures::gb36_synthetic();
    let config = SimulationConfig {
        dt: 0.01,
        horizon: 30.0,
        sample_every: 10,
    };
    let full = sweep_tables(
        &model,
        &location_spec(),
        config,
        ProtectionPolicy::default(),
        &PresetRegistry::builtin(),
    );
    let mut single = location_spec();
    single.cells[0].zones = vec!["Z20".into()];
    let one = sweep_tables(
        &model,
        &single,
        config,
        ProtectionPolicy::default(),
        &PresetRegistry::builtin(),
    );
    assert_eq!(one.rows[0].metrics, full.rows[3].metrics);
}

/// Co-locating the whole fleet with the attack should lower the largest
/// zonal RoCoF. The synthetic network does not reproduce this ordering; see
/// the README section on known divergences.
#[test]
#[ignore = "ordering not reproduced by the synthetic network"]
fn colocated_fleet_lowers_rocof() {
    let model = fixtures::gb36_synthetic();
    let config = SimulationConfig {
        dt: 0.01,
        horizon: 60.0,
        sample_every: 1,
    };
    let presets = PresetRegistry::builtin();
    let eval = |name: &str| {
        let m = presets.get(name).unwrap().apply(&model).unwrap();
        let t = run(&m, &static_laa("Z8", 880.68, 1.0).unwrap(), config).unwrap();
        FrequencyMetrics::from_trace(&t, &MetricOptions::default()).unwrap()
    };
    let colocated = eval("colocated-500");
    let distributed = eval("paper-500");
    assert!(colocated.max_rocof_zonal.abs() < distributed.max_rocof_zonal.abs());
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gridlaa_core::report::svg_points;

const BIN: &str = env!("CARGO_BIN_EXE_gridlaa");

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
}

fn gridlaa(args: &[&str], out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .env("GRIDLAA_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

/// Value following `key ` on the first stdout line starting with `key`.
fn field(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} ")))
        .unwrap_or_else(|| panic!("no `{key}` in {out}"))
        .trim()
        .to_string()
}

#[test]
fn synth_reproduces_the_shipped_network() {
    let tmp = tempfile::tempdir().unwrap();
    let o = gridlaa(&["synth", "--seed", "1"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let written = fs::read(tmp.path().join("gb36-synthetic-seed1.json")).unwrap();
    assert_eq!(written, fs::read(data("gb36-synthetic.json")).unwrap());
    let again = gridlaa(
        &[
            "synth",
            "--seed",
            "1",
            "--out",
            tmp.path().join("b").to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert!(again.status.success());
    assert_eq!(
        written,
        fs::read(tmp.path().join("b/gb36-synthetic-seed1.json")).unwrap()
    );
}

#[test]
fn empty_scenario_holds_nominal_frequency() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write_scenario(tmp.path(), "empty.json", r#"{"label": "quiet"}"#);
    let net = data("five-zone.json");
    let o = gridlaa(
        &[
            "run",
            "--network",
            net.to_str().unwrap(),
            "--scenario",
            &scenario,
            "--horizon",
            "20",
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("nadir 50.000 Hz"), "{out}");
    let dir = PathBuf::from(field(&out, "artifacts"));
    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["metrics"]["nadir"], 50.0);
    assert_eq!(metrics["violations"]["band"], "within_normal");
    for f in ["trace.csv", "events.json", "plot.svg", "run.json"] {
        assert!(dir.join(f).exists(), "{f}");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        tmp.path(),
        "step.json",
        r#"{"steps": [{"time_s": 1.0, "zone": "N2", "delta_mw": 150}]}"#,
    );
    let net = data("five-zone.json");
    let args = |out: &str| {
        vec![
            "run".to_string(),
            "--network".into(),
            net.display().to_string(),
            "--scenario".into(),
            scenario.clone(),
            "--horizon".into(),
            "30".into(),
            "--out".into(),
            out.to_string(),
        ]
    };
    let a_dir = tmp.path().join("a");
    let b_dir = tmp.path().join("b");
    let run = |dir: &Path| {
        let owned = args(dir.to_str().unwrap());
        let refs: Vec<&str> = owned.iter().map(|s| s.as_str()).collect();
        let o = gridlaa(&refs, tmp.path());
        assert!(o.status.success(), "{}", stderr(&o));
        field(&stdout(&o), "run")
    };
    let (id_a, id_b) = (run(&a_dir), run(&b_dir));
    assert_eq!(id_a, id_b);
    for f in ["trace.csv", "metrics.json", "events.json", "plot.svg"] {
        assert_eq!(
            fs::read(a_dir.join(&id_a).join(f)).unwrap(),
            fs::read(b_dir.join(&id_b).join(f)).unwrap(),
            "{f}"
        );
    }

    // The plot's frequency polyline is exactly the CSV's first two columns.
    let csv = fs::read_to_string(a_dir.join(&id_a).join("trace.csv")).unwrap();
    let svg = fs::read_to_string(a_dir.join(&id_a).join("plot.svg")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "time,coi_freq,shed_mw,f_N1,f_N2,f_N3,f_N4,f_N5,p_bess_dr_N2,p_bess_dc_N4"
    );
    let rows: Vec<(String, String)> = lines
        .map(|l| {
            let mut it = l.split(',');
            (it.next().unwrap().into(), it.next().unwrap().into())
        })
        .collect();
    assert_eq!(rows.len(), 3001);
    assert_eq!(svg_points(&svg, "coi-frequency").unwrap(), rows);
    assert!(svg.contains("transform=\"matrix("));

    let events: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a_dir.join(&id_a).join("events.json")).unwrap())
            .unwrap();
    assert_eq!(events["events"][0]["kind"], "attack_step");
    assert_eq!(events["events"][0]["time"], 1.0);
}

#[test]
fn fail_on_breach_matches_the_metrics_document() {
    let tmp = tempfile::tempdir().unwrap();
    let net = data("gb36-synthetic.json");
    let small = write_scenario(
        tmp.path(),
        "small.json",
        r#"{"steps": [{"time_s": 1.0, "zone": "Z8", "delta_mw": 660}]}"#,
    );
    let large = write_scenario(
        tmp.path(),
        "large.json",
        r#"{"steps": [{"time_s": 1.0, "zone": "Z8", "delta_mw": 1600}]}"#,
    );
    for (scenario, expect) in [(small, 0), (large, 3)] {
        let o = gridlaa(
            &[
                "run",
                "--network",
                net.to_str().unwrap(),
                "--scenario",
                &scenario,
                "--fail-on-breach",
                "49.8",
                "--horizon",
                "60",
                "--sample-every",
                "10",
            ],
            tmp.path(),
        );
        assert_eq!(o.status.code(), Some(expect), "{}", stderr(&o));
        let dir = PathBuf::from(field(&stdout(&o), "artifacts"));
        let doc: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.join("metrics.json")).unwrap()).unwrap();
        let nadir = doc["metrics"]["nadir"].as_f64().unwrap();
        assert_eq!(nadir < 49.8, expect == 3);
    }
}

#[test]
fn validation_errors_exit_2_with_context() {
    let tmp = tempfile::tempdir().unwrap();
    let mut doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(data("two-zone.json")).unwrap()).unwrap();
    doc["generators"][0]["rating"] = serde_json::json!(-5);
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, doc.to_string()).unwrap();
    let scenario = write_scenario(tmp.path(), "s.json", "{}");
    let o = gridlaa(
        &[
            "run",
            "--network",
            bad.to_str().unwrap(),
            "--scenario",
            &scenario,
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("bad.json") && err.contains("generators[0].rating"),
        "{err}"
    );

    let typo = write_scenario(
        tmp.path(),
        "typo.json",
        r#"{"steps": [{"time": 1, "zone": "A", "delta_mw": 5}]}"#,
    );
    let net = data("two-zone.json");
    let o = gridlaa(
        &[
            "run",
            "--network",
            net.to_str().unwrap(),
            "--scenario",
            &typo,
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("steps[0]"), "{}", stderr(&o));

    let o = gridlaa(
        &["run", "--network", "/nonexistent.json", "--scenario", &typo],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent.json"));
}

#[test]
fn numerical_failure_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        tmp.path(),
        "s.json",
        r#"{"steps": [{"time_s": 0, "zone": "A", "delta_mw": 100}]}"#,
    );
    let net = data("two-zone.json");
    let o = gridlaa(
        &[
            "run",
            "--network",
            net.to_str().unwrap(),
            "--scenario",
            &scenario,
            "--dt",
            "1e154",
            "--horizon",
            "1e155",
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn threshold_command() {
    let tmp = tempfile::tempdir().unwrap();
    let net = data("two-zone.json");
    let net = net.to_str().unwrap();
    let o = gridlaa(
        &[
            "threshold",
            "--network",
            net,
            "--zone",
            "A",
            "--limit",
            "49.8",
            "--bracket",
            "0",
            "0",
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));

    let o = gridlaa(
        &[
            "threshold",
            "--network",
            net,
            "--zone",
            "A",
            "--limit",
            "49.8",
            "--bracket",
            "0",
            "5",
            "--horizon",
            "30",
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nadir at lo"), "{}", stderr(&o));

    let args = [
        "threshold",
        "--network",
        net,
        "--zone",
        "A",
        "--limit",
        "49.8",
        "--bracket",
        "0",
        "400",
        "--horizon",
        "30",
    ];
    let first = gridlaa(&args, tmp.path());
    let second = gridlaa(&args, tmp.path());
    assert!(first.status.success(), "{}", stderr(&first));
    assert_eq!(stdout(&first), stdout(&second));
    let path = PathBuf::from(field(&stdout(&first), "artifacts"));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert!(doc["result"]["min_laa"].as_f64().unwrap() > 0.0);
    assert_eq!(doc["bess"], "none");
}

#[test]
fn threshold_is_higher_with_the_reference_fleet() {
    let tmp = tempfile::tempdir().unwrap();
    let net = data("gb36-synthetic.json");
    let min_laa = |bess: &str| {
        let o = gridlaa(
            &[
                "threshold",
                "--network",
                net.to_str().unwrap(),
                "--zone",
                "Z8",
                "--limit",
                "49.8",
                "--bracket",
                "0",
                "4000",
                "--bess",
                bess,
                "--horizon",
                "60",
                "--sample-every",
                "10",
            ],
            tmp.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
        let path = PathBuf::from(field(&stdout(&o), "artifacts"));
        let doc: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
        doc["result"]["min_laa"].as_f64().unwrap()
    };
    assert!(min_laa("none") < min_laa("paper-500"));
}

#[test]
fn sweep_command_writes_document_and_table() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_scenario(
        tmp.path(),
        "spec.json",
        r#"{"label": "demo", "cells": [
            {"bess": "none", "zones": ["A", "B"],
             "study": {"kind": "threshold", "limits": [49.8], "bracket": [0, 400]}},
            {"bess": "none", "zones": ["Nowhere"],
             "study": {"kind": "fixed", "magnitude_mw": 10}}
        ]}"#,
    );
    let net = data("two-zone.json");
    let o = gridlaa(
        &[
            "sweep",
            "--network",
            net.to_str().unwrap(),
            "--spec",
            &spec,
            "--horizon",
            "30",
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("1 of 3 rows failed"));
    let path = PathBuf::from(field(&stdout(&o), "artifacts"));
    assert!(
        path.starts_with(tmp.path()),
        "default dir comes from the environment"
    );
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["label"], "demo");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 3);
    assert_eq!(doc["run_id"].as_str().unwrap().len(), 12);
    assert_eq!(doc["config_hash"].as_str().unwrap().len(), 64);
    let table = fs::read_to_string(path.with_extension("txt")).unwrap();
    assert_eq!(table.lines().count(), 4);
    assert!(table.lines().next().unwrap().starts_with("cell  bess"));
}

#[test]
fn adversary_scenario_drives_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        tmp.path(),
        "adv.json",
        r#"{"label": "feedback", "adversary": {
            "budget_mw": 300, "strategy": "LowBudgetDynamic", "impact_target_hz": 49.8,
            "vulnerable_zones": ["A", "B"], "max_iterations": 4
        }}"#,
    );
    let net = data("two-zone.json");
    let o = gridlaa(
        &[
            "run",
            "--network",
            net.to_str().unwrap(),
            "--scenario",
            &scenario,
            "--horizon",
            "30",
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("target reached"), "{}", stdout(&o));
    let dir = PathBuf::from(field(&stdout(&o), "artifacts"));
    let adv: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("adversary.json")).unwrap()).unwrap();
    assert_eq!(adv["achieved"], true);

    let unknown = write_scenario(
        tmp.path(),
        "bad.json",
        r#"{"adversary": {"budget_mw": 300, "strategy": "Botnet", "impact_target_hz": 49.8, "vulnerable_zones": ["A"]}}"#,
    );
    let o = gridlaa(
        &[
            "run",
            "--network",
            net.to_str().unwrap(),
            "--scenario",
            &unknown,
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Botnet"));
}

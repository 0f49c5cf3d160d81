//! Serialized run artifacts: trace CSV, event log, metrics and sweep
//! documents, the two-panel SVG plot, and content hashes binding them to
//! their inputs.
//!
//! Everything here is a pure function of its arguments so the artifacts of
//! a repeated run are byte-identical. Wall-clock timestamps live only in
//! [`RunRecord`], which is written separately.

use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{FrequencyMetrics, SweepTable};
use crate::attack::AttackScenario;
use crate::dynamics::{SimulationConfig, Trace, TraceEvent};
use crate::error::Result;
use crate::grid::NetworkModel;
use crate::protection::ViolationReport;

/// Hex length of run ids, like an abbreviated commit hash.
pub const RUN_ID_LEN: usize = 12;

/// Shortest round-trip decimal form, shared by the CSV and the SVG so
/// their numbers compare equal as text.
pub fn fmt_value(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

/// Time column form: rounded to 1 ns to hide `k * dt` representation noise.
pub fn fmt_time(t: f64) -> String {
    fmt_value((t * 1e9).round() / 1e9)
}

fn sha256_hex(chunks: &[&[u8]]) -> String {
    let mut hasher = Sha256::new();
    for chunk in chunks {
        hasher.update((chunk.len() as u64).to_le_bytes());
        hasher.update(chunk);
    }
    hex::encode(hasher.finalize())
}

/// Content hash of any serializable value, full length.
pub fn content_hash<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(sha256_hex(&[&serde_json::to_vec(value)?]))
}

/// Run id binding a network, a scenario and a simulation configuration.
pub fn run_id(
    model: &NetworkModel,
    scenario: &(impl Serialize + ?Sized),
    config: &SimulationConfig,
) -> Result<String> {
    let parts = [
        serde_json::to_vec(model)?,
        serde_json::to_vec(scenario)?,
        serde_json::to_vec(config)?,
    ];
    let refs: Vec<&[u8]> = parts.iter().map(|p| p.as_slice()).collect();
    Ok(sha256_hex(&refs)[..RUN_ID_LEN].to_string())
}

pub fn csv_header(trace: &Trace) -> String {
    let mut cols = vec!["time".to_string(), "coi_freq".into(), "shed_mw".into()];
    cols.extend(trace.zone_ids.iter().map(|z| format!("f_{z}")));
    cols.extend(trace.bess_ids.iter().map(|u| format!("p_bess_{u}")));
    cols.join(",")
}

/// One header line and one row per sample.
pub fn trace_csv(trace: &Trace) -> String {
    let mut out = csv_header(trace);
    out.push('\n');
    for s in &trace.samples {
        out.push_str(&fmt_time(s.time));
        for v in [s.coi_freq, s.shed_mw]
            .into_iter()
            .chain(s.zone_freq.iter().copied())
            .chain(s.bess_power.iter().copied())
        {
            out.push(',');
            out.push_str(&fmt_value(v));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct EventLog<'a> {
    run_id: &'a str,
    events: &'a [TraceEvent],
}

pub fn events_json(run_id: &str, trace: &Trace) -> Result<String> {
    Ok(serde_json::to_string_pretty(&EventLog {
        run_id,
        events: &trace.events,
    })? + "\n")
}

/// Deterministic per-run metrics document.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsDocument<'a> {
    pub run_id: &'a str,
    pub scenario: &'a AttackScenario,
    pub config: &'a SimulationConfig,
    pub metrics: &'a FrequencyMetrics,
    pub violations: &'a ViolationReport,
}

impl MetricsDocument<'_> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// One-line summary matching the sweep table columns.
pub fn metrics_row(m: &FrequencyMetrics) -> String {
    format!(
        "rocof {:.4} p.u./s  zonal {:.4} ({})  nadir {:.3} Hz at {:.2} s  settling {:.3} Hz  ufls {}",
        m.max_rocof,
        m.max_rocof_zonal,
        m.rocof_zone,
        m.nadir,
        m.nadir_time,
        m.settling_freq,
        if m.ufls_triggered { "yes" } else { "no" }
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepDocument<'a> {
    pub run_id: String,
    pub config_hash: String,
    pub label: &'a str,
    pub rows: &'a [crate::analysis::SweepRow],
}

impl<'a> SweepDocument<'a> {
    pub fn new(
        model: &NetworkModel,
        spec: &crate::analysis::SweepSpec,
        config: &SimulationConfig,
        table: &'a SweepTable,
        label: &'a str,
    ) -> Result<Self> {
        Ok(SweepDocument {
            run_id: run_id(model, spec, config)?,
            config_hash: content_hash(&(spec, config))?,
            label,
            rows: &table.rows,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactPaths {
    pub trace_csv: String,
    pub metrics: String,
    pub events: String,
    pub plot: String,
}

/// Sidecar describing when a run happened and where its artifacts are.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub run_id: String,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
    pub artifacts: ArtifactPaths,
}

const WIDTH: f64 = 800.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 780.0;

struct Panel {
    top: f64,
    bottom: f64,
    title: &'static str,
    unit: &'static str,
}

fn padded_range(values: impl Iterator<Item = f64>, pad: f64) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    if !lo.is_finite() {
        return (-pad, pad);
    }
    if hi - lo < 1e-12 {
        (lo - pad, hi + pad)
    } else {
        let m = 0.05 * (hi - lo);
        (lo - m, hi + m)
    }
}

/// Draws a polyline whose `points` are raw data coordinates; the
/// `transform` matrix maps them into the panel.
fn panel(
    out: &mut String,
    p: &Panel,
    (t0, t1): (f64, f64),
    (y0, y1): (f64, f64),
    points: &str,
    class: &str,
) {
    let sx = (RIGHT - LEFT) / (t1 - t0);
    let sy = (p.bottom - p.top) / (y1 - y0);
    let tx = LEFT - sx * t0;
    let ty = p.top + sy * y1;
    let _ = writeln!(
        out,
        r##"<rect x="{LEFT}" y="{}" width="{}" height="{}" fill="none" stroke="#888"/>"##,
        p.top,
        RIGHT - LEFT,
        p.bottom - p.top
    );
    let _ = writeln!(
        out,
        r#"<text x="{LEFT}" y="{}" font-size="13">{}</text>"#,
        p.top - 6.0,
        p.title
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{:.3} {}</text>"#,
        LEFT - 4.0,
        p.top + 10.0,
        y1,
        p.unit
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{:.3} {}</text>"#,
        LEFT - 4.0,
        p.bottom,
        y0,
        p.unit
    );
    let _ = writeln!(
        out,
        r#"<text x="{LEFT}" y="{}" font-size="11">{t0} s</text>"#,
        p.bottom + 14.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{RIGHT}" y="{}" font-size="11" text-anchor="end">{t1} s</text>"#,
        p.bottom + 14.0
    );
    let _ = writeln!(
        out,
        r#"<polyline class="{class}" fill="none" stroke="currentColor" stroke-width="1.5" vector-effect="non-scaling-stroke" transform="matrix({sx} 0 0 {} {tx} {ty})" points="{points}"/>"#,
        -sy
    );
}

/// Attack load on top of the initial demand at each sample, MW. Shed base
/// load is added back so the staircase shows only the injected steps.
pub fn injected_load(trace: &Trace) -> Vec<f64> {
    let base = if trace.samples.is_empty() {
        0.0
    } else {
        trace.total_load(0)
    };
    (0..trace.samples.len())
        .map(|i| trace.total_load(i) - base + trace.samples[i].shed_mw)
        .collect()
}

/// Two stacked panels: COI frequency and the attack-load staircase. The
/// frequency points are the `time` and `coi_freq` CSV fields verbatim.
pub fn plot_svg(trace: &Trace, title: &str) -> String {
    let height = 560.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<title>{}</title>"#, escape(title));
    let times: Vec<String> = trace.samples.iter().map(|s| fmt_time(s.time)).collect();
    let (t0, t1) = match (trace.samples.first(), trace.samples.last()) {
        (Some(a), Some(b)) if b.time > a.time => (a.time, b.time),
        (Some(a), _) => (a.time, a.time + 1.0),
        _ => (0.0, 1.0),
    };

    let freq_points = join_points(&times, trace.samples.iter().map(|s| s.coi_freq));
    let freq_range = padded_range(trace.coi(), 0.05);
    panel(
        &mut out,
        &Panel {
            top: 40.0,
            bottom: 260.0,
            title: "COI frequency",
            unit: "Hz",
        },
        (t0, t1),
        freq_range,
        &freq_points,
        "coi-frequency",
    );

    let load = injected_load(trace);
    let load_points = join_points(&times, load.iter().copied());
    let load_range = padded_range(load.iter().copied(), 1.0);
    panel(
        &mut out,
        &Panel {
            top: 320.0,
            bottom: 520.0,
            title: "Injected attack load",
            unit: "MW",
        },
        (t0, t1),
        load_range,
        &load_points,
        "attack-load",
    );
    out.push_str("</svg>\n");
    out
}

fn join_points(times: &[String], values: impl Iterator<Item = f64>) -> String {
    let mut s = String::new();
    for (t, v) in times.iter().zip(values) {
        if !s.is_empty() {
            s.push(' ');
        }
        s.push_str(t);
        s.push(',');
        s.push_str(&fmt_value(v));
    }
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// `(time, value)` pairs of the polyline with the given class, as text.
pub fn svg_points(svg: &str, class: &str) -> Option<Vec<(String, String)>> {
    let line = svg
        .lines()
        .find(|l| l.contains(&format!(r#"class="{class}""#)))?;
    let start = line.find(r#"points=""#)? + 8;
    let end = start + line[start..].find('"')?;
    Some(
        line[start..end]
            .split(' ')
            .filter(|p| !p.is_empty())
            .filter_map(|p| p.split_once(','))
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::static_laa;
    use crate::dynamics::run;
    use crate::grid::fixtures;

    fn sample_trace() -> Trace {
        let model = fixtures::five_zone();
        let scenario = static_laa("N2", 150.0, 1.0).unwrap();
        run(
            &model,
            &scenario,
            SimulationConfig {
                dt: 0.01,
                horizon: 5.0,
                sample_every: 5,
            },
        )
        .unwrap()
    }

    #[test]
    fn csv_header_and_rows() {
        let t = sample_trace();
        let csv = trace_csv(&t);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "time,coi_freq,shed_mw,f_N1,f_N2,f_N3,f_N4,f_N5,p_bess_dr_N2,p_bess_dc_N4"
        );
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), t.samples.len());
        assert!(rows[0].starts_with("0,50,0,"));
        assert!(rows[rows.len() - 1].starts_with("5,"));
    }

    #[test]
    fn svg_points_equal_csv_rows() {
        let t = sample_trace();
        let csv = trace_csv(&t);
        let svg = plot_svg(&t, "test <run>");
        let pts = svg_points(&svg, "coi-frequency").unwrap();
        let rows: Vec<(String, String)> = csv
            .lines()
            .skip(1)
            .map(|l| {
                let mut f = l.split(',');
                (f.next().unwrap().to_string(), f.next().unwrap().to_string())
            })
            .collect();
        assert_eq!(pts, rows);
        let load = svg_points(&svg, "attack-load").unwrap();
        assert_eq!(load.len(), rows.len());
        assert_eq!(load[0].1, "0");
        assert_eq!(load.last().unwrap().1, "150");
        assert!(svg.contains("test &lt;run&gt;"));
    }

    #[test]
    fn run_id_tracks_inputs() {
        let model = fixtures::two_zone();
        let s = static_laa("A", 100.0, 1.0).unwrap();
        let c = SimulationConfig::default();
        let a = run_id(&model, &s, &c).unwrap();
        assert_eq!(a.len(), RUN_ID_LEN);
        assert_eq!(a, run_id(&model, &s, &c).unwrap());
        let s2 = static_laa("A", 101.0, 1.0).unwrap();
        assert_ne!(a, run_id(&model, &s2, &c).unwrap());
        let c2 = SimulationConfig { dt: 0.005, ..c };
        assert_ne!(a, run_id(&model, &s, &c2).unwrap());
    }

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_time(0.1 + 0.2), "0.3");
        assert_eq!(fmt_time(3.0), "3");
        assert_eq!(fmt_value(-0.0), "0");
        assert_eq!(fmt_value(49.995), "49.995");
    }
}

//! Batch studies: one or more cells, each fixing a BESS preset and a set of
//! attacked zones, expanded into independent rows and evaluated in parallel.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{FrequencyMetrics, MetricOptions};
use super::threshold::{ThresholdSearch, DEFAULT_TOLERANCE_MW};
use crate::attack::{dynamic_laa, static_laa, DEFAULT_ATTACK_TIME};
use crate::dynamics::{run_with_policy, SimulationConfig};
use crate::error::{GridError, Result};
use crate::grid::NetworkModel;
use crate::protection::ProtectionPolicy;
use crate::services::PresetRegistry;

fn default_tol() -> f64 {
    DEFAULT_TOLERANCE_MW
}

fn default_attack_time() -> f64 {
    DEFAULT_ATTACK_TIME
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Study {
    /// Minimum static LAA per zone and frequency limit.
    Threshold {
        limits: Vec<f64>,
        bracket: [f64; 2],
        #[serde(default = "default_tol")]
        tol: f64,
    },
    /// A fixed attack per zone: one step at `attack_time_s`, or equal
    /// steps at `step_times_s` when given.
    Fixed {
        magnitude_mw: f64,
        #[serde(default = "default_attack_time")]
        attack_time_s: f64,
        #[serde(default)]
        step_times_s: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCell {
    /// Registered BESS preset name.
    pub bess: String,
    pub zones: Vec<String>,
    pub study: Study,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub cells: Vec<SweepCell>,
}

impl SweepSpec {
    pub fn parse(document: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(document);
        serde_path_to_error::deserialize(de).map_err(|e| GridError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub cell: usize,
    pub bess: String,
    pub zone: String,
    /// `threshold`, `static` or `dynamic`.
    pub study: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_hz: Option<f64>,
    /// Threshold found, or the fixed attack magnitude.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub laa_mw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    /// Metrics of the run at `laa_mw`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<FrequencyMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn errors(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.error.is_some())
    }
}

struct Job<'a> {
    cell: usize,
    zone: &'a str,
    limit: Option<f64>,
}

/// Evaluates every cell of `spec`. Individual failures are recorded on
/// their rows and do not stop the sweep; rows keep spec order.
pub fn sweep_tables(
    model: &NetworkModel,
    spec: &SweepSpec,
    config: SimulationConfig,
    policy: ProtectionPolicy,
    presets: &PresetRegistry,
) -> SweepTable {
    let models: Vec<Result<NetworkModel>> = spec
        .cells
        .iter()
        .map(|c| presets.get(&c.bess).and_then(|p| p.apply(model)))
        .collect();

    let mut jobs = Vec::new();
    for (i, cell) in spec.cells.iter().enumerate() {
        for zone in &cell.zones {
            match &cell.study {
                Study::Threshold { limits, .. } => jobs.extend(limits.iter().map(|&l| Job {
                    cell: i,
                    zone,
                    limit: Some(l),
                })),
                Study::Fixed { .. } => jobs.push(Job {
                    cell: i,
                    zone,
                    limit: None,
                }),
            }
        }
    }

    let rows = jobs
        .par_iter()
        .map(|job| {
            let cell = &spec.cells[job.cell];
            let mut row = SweepRow {
                cell: job.cell,
                bess: cell.bess.clone(),
                zone: job.zone.to_string(),
                study: "threshold",
                limit_hz: job.limit,
                laa_mw: None,
                iterations: None,
                metrics: None,
                error: None,
            };
            if let Study::Fixed {
                magnitude_mw,
                step_times_s,
                ..
            } = &cell.study
            {
                row.study = if step_times_s.is_some() {
                    "dynamic"
                } else {
                    "static"
                };
                row.laa_mw = Some(*magnitude_mw);
            }
            let outcome = models[job.cell]
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|m| evaluate(m, cell, job, config, policy).map_err(|e| e.to_string()));
            match outcome {
                Ok((laa, iterations, metrics)) => {
                    row.laa_mw = Some(laa);
                    row.iterations = iterations;
                    row.metrics = Some(metrics);
                }
                Err(e) => row.error = Some(e),
            }
            row
        })
        .collect();
    SweepTable { rows }
}

fn evaluate(
    model: &NetworkModel,
    cell: &SweepCell,
    job: &Job<'_>,
    config: SimulationConfig,
    policy: ProtectionPolicy,
) -> Result<(f64, Option<usize>, FrequencyMetrics)> {
    match &cell.study {
        Study::Threshold { bracket, tol, .. } => {
            let limit = job.limit.expect("threshold jobs carry a limit");
            let mut search =
                ThresholdSearch::new(model, job.zone, limit, (bracket[0], bracket[1]), config);
            search.tol = *tol;
            search.policy = policy;
            let r = search.run()?;
            Ok((r.min_laa, Some(r.iterations), r.hi_metrics))
        }
        Study::Fixed {
            magnitude_mw,
            attack_time_s,
            step_times_s,
        } => {
            let scenario = match step_times_s {
                Some(times) => dynamic_laa(job.zone, *magnitude_mw, times)?,
                None => static_laa(job.zone, *magnitude_mw, *attack_time_s)?,
            };
            let trace = run_with_policy(model, &scenario, config, policy)?;
            let metrics = FrequencyMetrics::from_trace(&trace, &MetricOptions::default())?;
            Ok((*magnitude_mw, None, metrics))
        }
    }
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.prec$}"))
}

/// Aligned plain-text rendering, one line per row.
pub fn render_table(table: &SweepTable) -> String {
    let header = [
        "cell",
        "bess",
        "zone",
        "study",
        "limit_hz",
        "laa_mw",
        "iter",
        "rocof_pu_s",
        "rocof_zonal",
        "rocof_zone",
        "nadir_hz",
        "nadir_t_s",
        "settling_hz",
        "ufls",
        "error",
    ];
    let mut lines: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for r in &table.rows {
        let m = r.metrics.as_ref();
        lines.push(vec![
            r.cell.to_string(),
            r.bess.clone(),
            r.zone.clone(),
            r.study.to_string(),
            opt(r.limit_hz, 2),
            opt(r.laa_mw, 2),
            r.iterations.map_or_else(|| "-".into(), |i| i.to_string()),
            opt(m.map(|m| m.max_rocof), 4),
            opt(m.map(|m| m.max_rocof_zonal), 4),
            m.map_or_else(|| "-".into(), |m| m.rocof_zone.clone()),
            opt(m.map(|m| m.nadir), 3),
            opt(m.map(|m| m.nadir_time), 2),
            opt(m.map(|m| m.settling_freq), 3),
            m.map_or_else(
                || "-".into(),
                |m| if m.ufls_triggered { "yes" } else { "no" }.into(),
            ),
            r.error.clone().unwrap_or_else(|| "-".into()),
        ]);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for line in &lines {
        let cells: Vec<String> = line
            .iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s:<w$}"))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

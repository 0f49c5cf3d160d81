use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use gridlaa_core::analysis::{
    render_table, sweep_tables, FrequencyMetrics, MetricOptions, SweepSpec, ThresholdResult,
    ThresholdSearch,
};
use gridlaa_core::attack::{feedback_adversary, AdversaryOutcome, ScenarioFile, StrategyRegistry};
use gridlaa_core::dynamics::run_with_policy;
use gridlaa_core::grid::{load_network, synthesize_gb36, NetworkModel};
use gridlaa_core::protection::classify_excursion;
use gridlaa_core::report::{
    events_json, metrics_row, plot_svg, run_id, trace_csv, ArtifactPaths, MetricsDocument,
    RunRecord, SweepDocument,
};
use gridlaa_core::services::PresetRegistry;
use serde::Serialize;

use crate::{CliError, RunArgs, SweepArgs, SynthArgs, ThresholdArgs};

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn load_model(path: &Path, bess: Option<&str>) -> Result<NetworkModel, CliError> {
    let model = load_network(&read(path)?).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })?;
    match bess {
        None => Ok(model),
        Some(name) => Ok(PresetRegistry::builtin().get(name)?.apply(&model)?),
    }
}

fn to_json(value: &impl Serialize) -> Result<String, CliError> {
    let text = serde_json::to_string_pretty(value).map_err(gridlaa_core::GridError::from)?;
    Ok(text + "\n")
}

pub fn cmd_synth(args: &SynthArgs) -> Result<PathBuf, CliError> {
    let path = args
        .out
        .out
        .join(format!("gb36-synthetic-seed{}.json", args.seed));
    write(&path, &(synthesize_gb36(args.seed).to_json() + "\n"))?;
    println!("{}", path.display());
    Ok(path)
}

#[derive(Debug)]
pub struct RunOutcome {
    pub run_id: String,
    pub dir: PathBuf,
    pub metrics: FrequencyMetrics,
}

/// Simulates one scenario and writes its artifacts under `<out>/<run id>/`.
pub fn cmd_run(args: &RunArgs) -> Result<RunOutcome, CliError> {
    let started = unix_now();
    let model = load_model(&args.network, args.bess.as_deref())?;
    let file = ScenarioFile::parse(&read(&args.scenario)?).map_err(|source| CliError::Input {
        path: args.scenario.clone(),
        source,
    })?;
    let config = args.sim.config();
    config.validate()?;
    let policy = file.protection.unwrap_or_default();

    let mut adversary: Option<AdversaryOutcome> = None;
    let scenario = match &file.adversary {
        Some(_) if !file.steps.is_empty() => {
            return Err(CliError::Input {
                path: args.scenario.clone(),
                source: gridlaa_core::GridError::Scenario(
                    "a scenario gives either explicit steps or an adversary, not both".into(),
                ),
            })
        }
        Some(spec) => {
            let outcome =
                feedback_adversary(&model, spec, config, policy, &StrategyRegistry::builtin())?;
            println!(
                "adversary {}: {} after {} iteration(s), nadir {:.4} Hz",
                spec.strategy,
                if outcome.achieved {
                    "target reached"
                } else {
                    "target missed"
                },
                outcome.iterations,
                outcome.observed_nadir
            );
            let s = outcome.scenario.clone();
            adversary = Some(outcome);
            s
        }
        None => file.scenario(),
    };

    let id = run_id(&model, &(&scenario, &policy), &config)?;
    let trace = run_with_policy(&model, &scenario, config, policy)?;
    let metrics = FrequencyMetrics::from_trace(&trace, &MetricOptions::default())?;
    let violations = classify_excursion(&trace, &policy)?;

    let dir = args.out.out.join(&id);
    let paths = ArtifactPaths {
        trace_csv: "trace.csv".into(),
        metrics: "metrics.json".into(),
        events: "events.json".into(),
        plot: "plot.svg".into(),
    };
    let doc = MetricsDocument {
        run_id: &id,
        scenario: &scenario,
        config: &config,
        metrics: &metrics,
        violations: &violations,
    };
    let title = if scenario.label.is_empty() {
        format!("run {id}")
    } else {
        format!("{} ({id})", scenario.label)
    };
    write(&dir.join(&paths.trace_csv), &trace_csv(&trace))?;
    write(&dir.join(&paths.metrics), &doc.to_json()?)?;
    write(&dir.join(&paths.events), &events_json(&id, &trace)?)?;
    write(&dir.join(&paths.plot), &plot_svg(&trace, &title))?;
    if let Some(outcome) = &adversary {
        write(&dir.join("adversary.json"), &to_json(outcome)?)?;
    }
    let record = RunRecord {
        run_id: id.clone(),
        started_unix_s: started,
        finished_unix_s: unix_now(),
        artifacts: paths,
    };
    write(&dir.join("run.json"), &to_json(&record)?)?;

    println!("run {id}");
    println!("{}", metrics_row(&metrics));
    println!("band {:?}", violations.band);
    println!("artifacts {}", dir.display());

    if let Some(limit) = args.fail_on_breach {
        if metrics.breaches(limit) {
            return Err(CliError::Breach {
                nadir: metrics.nadir,
                limit,
            });
        }
    }
    Ok(RunOutcome {
        run_id: id,
        dir,
        metrics,
    })
}

#[derive(Serialize)]
struct ThresholdDocument<'a> {
    run_id: &'a str,
    bess: &'a str,
    tol: f64,
    result: &'a ThresholdResult,
}

pub fn cmd_threshold(args: &ThresholdArgs) -> Result<ThresholdResult, CliError> {
    let [lo, hi] = args.bracket[..] else {
        return Err(CliError::Usage("--bracket needs exactly two values".into()));
    };
    if !(lo >= 0.0 && hi > lo) {
        return Err(CliError::Usage(format!(
            "--bracket needs 0 <= lo < hi, got {lo} {hi}"
        )));
    }
    let model = load_model(&args.network, Some(&args.bess))?;
    let config = args.sim.config();
    let mut search = ThresholdSearch::new(&model, &args.zone, args.limit, (lo, hi), config);
    search.tol = args.tol;
    let result = search.run()?;

    let key = (&args.zone, args.limit, [lo, hi], args.tol);
    let id = run_id(&model, &key, &config)?;
    let doc = ThresholdDocument {
        run_id: &id,
        bess: &args.bess,
        tol: args.tol,
        result: &result,
    };
    let path = args.out.out.join(format!("threshold-{id}.json"));
    write(&path, &to_json(&doc)?)?;

    println!(
        "zone {}  bess {}  limit {} Hz  min_laa {:.2} MW  iterations {}  nadir {:.4} Hz",
        result.zone,
        args.bess,
        result.limit,
        result.min_laa,
        result.iterations,
        result.hi_metrics.nadir
    );
    println!("artifacts {}", path.display());
    Ok(result)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<PathBuf, CliError> {
    let model = load_model(&args.network, None)?;
    let spec = SweepSpec::parse(&read(&args.spec)?).map_err(|source| CliError::Input {
        path: args.spec.clone(),
        source,
    })?;
    let config = args.sim.config();
    config.validate()?;
    let table = sweep_tables(
        &model,
        &spec,
        config,
        Default::default(),
        &PresetRegistry::builtin(),
    );
    let doc = SweepDocument::new(&model, &spec, &config, &table, &spec.label)?;
    let text = render_table(&table);
    let json_path = args.out.out.join(format!("sweep-{}.json", doc.run_id));
    write(&json_path, &doc.to_json()?)?;
    write(
        &args.out.out.join(format!("sweep-{}.txt", doc.run_id)),
        &text,
    )?;

    print!("{text}");
    let failures = table.errors().count();
    if failures > 0 {
        eprintln!("{failures} of {} rows failed", table.rows.len());
    }
    println!("artifacts {}", json_path.display());
    Ok(json_path)
}

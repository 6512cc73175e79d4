//! Replicated experiments, result files, aggregation and charts.
//!
//! An experiment directory holds `experiment.toml` (the experiment that produced
//! it), `runs_<policy>.csv` with one row per replication step,
//! `aggregate_<policy>.csv` with the curves on the common budget grid and
//! SVG charts.

mod aggregate;
mod csvio;
mod plot;
mod spec;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

pub use aggregate::{aggregate, AggregateCurve};
pub use csvio::{csv_header, read_runs, write_runs};
pub use plot::emit_plots;
pub use spec::ExperimentSpec;

use crate::engine::{run, EngineConfig, Policy, RunRecord};
use crate::error::{Error, Result};
use crate::problems::ProblemDefinition;

/// Environment variable holding the replication worker count.
pub const WORKERS_ENV: &str = "DCBO_WORKERS";

/// Worker count from `DCBO_WORKERS`, else the available parallelism.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs replications with seeds `base_seed + i` on the worker pool; results
/// are in seed order.
pub fn run_replications(
    problem: &ProblemDefinition,
    policy: Policy,
    budget: f64,
    cfg: &EngineConfig,
    base_seed: u64,
    replications: usize,
) -> Result<Vec<Result<RunRecord>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(|| {
        (0..replications as u64).into_par_iter().map(|i| run(problem, policy, budget, base_seed + i, cfg)).collect()
    }))
}

/// Completed runs, failures and the aggregate of one policy.
#[derive(Debug, Clone)]
pub struct PolicyResult {
    pub policy: Policy,
    pub runs: Vec<RunRecord>,
    pub failures: Vec<(u64, String)>,
    pub curve: Option<AggregateCurve>,
}

/// Everything an experiment produced.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub spec: ExperimentSpec,
    pub results: Vec<PolicyResult>,
    pub files: Vec<PathBuf>,
}

fn runs_file(dir: &Path, policy: Policy) -> PathBuf {
    dir.join(format!("runs_{}.csv", policy.name()))
}

fn write_aggregate(path: &Path, curve: &AggregateCurve) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let mut header = vec!["budget".to_string(), "median".into(), "p25".into(), "p75".into()];
    header.extend((0..curve.cumulative.len()).map(|t| format!("evals_task{t}")));
    w.write_record(&header)?;
    for i in 0..curve.budget.len() {
        let mut row = vec![
            curve.budget[i].to_string(),
            curve.median[i].to_string(),
            curve.p25[i].to_string(),
            curve.p75[i].to_string(),
        ];
        row.extend(curve.cumulative.iter().map(|c| c[i].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn chart_title(spec: &ExperimentSpec, problem: &ProblemDefinition) -> String {
    format!("{} costs {}", spec.problem, problem.costs())
}

/// Aggregates completed runs of one policy, warning when fewer than half finished.
fn summarise(
    spec: &ExperimentSpec,
    problem: &ProblemDefinition,
    policy: Policy,
    runs: &[RunRecord],
) -> Result<Option<AggregateCurve>> {
    if runs.len() * 2 < spec.replications {
        warn!("{policy}: only {} of {} replications completed", runs.len(), spec.replications);
    }
    if runs.is_empty() {
        return Ok(None);
    }
    let step = problem.costs().min();
    aggregate(policy.name(), runs, step, problem.num_tasks(), spec.initial_design_size).map(Some)
}

/// Runs every policy of `spec`, then writes the experiment file, run CSVs, aggregate
/// CSVs and charts into `spec.output`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let problem = spec.problem_definition()?;
    let cfg = spec.engine_config()?;
    fs::create_dir_all(&spec.output)?;
    let spec_path = spec.output.join(spec::SPEC_FILE);
    fs::write(&spec_path, spec.to_toml()?)?;
    let mut files = vec![spec_path];
    let mut results = Vec::new();
    for &policy in &spec.policies {
        info!("{}: {policy} x {} replications", spec.problem, spec.replications);
        let outcomes = run_replications(&problem, policy, spec.budget, &cfg, spec.base_seed, spec.replications)?;
        let mut runs = Vec::new();
        let mut failures = Vec::new();
        for (i, o) in outcomes.into_iter().enumerate() {
            match o {
                Ok(r) => runs.push(r),
                Err(e) => {
                    let seed = spec.base_seed + i as u64;
                    warn!("{policy} seed {seed} failed: {e}");
                    failures.push((seed, e.to_string()));
                }
            }
        }
        let path = runs_file(&spec.output, policy);
        write_runs(BufWriter::new(File::create(&path)?), problem.dim(), &runs)?;
        files.push(path);
        let curve = summarise(spec, &problem, policy, &runs)?;
        if let Some(c) = &curve {
            let path = spec.output.join(format!("aggregate_{}.csv", policy.name()));
            write_aggregate(&path, c)?;
            files.push(path);
        }
        results.push(PolicyResult { policy, runs, failures, curve });
    }
    let curves: Vec<AggregateCurve> = results.iter().filter_map(|r| r.curve.clone()).collect();
    files.extend(emit_plots(&curves, &spec.output, &chart_title(spec, &problem))?);
    Ok(ExperimentOutcome { spec: spec.clone(), results, files })
}

/// Completed runs of one policy.
pub type PolicyRuns = (Policy, Vec<RunRecord>);

/// Reads an experiment directory back: its spec and the runs of each policy.
pub fn load_experiment(dir: &Path) -> Result<(ExperimentSpec, Vec<PolicyRuns>)> {
    let spec = ExperimentSpec::load(&dir.join(spec::SPEC_FILE))?;
    let mut out = Vec::new();
    for &policy in &spec.policies {
        let path = runs_file(dir, policy);
        if !path.exists() {
            warn!("missing {}", path.display());
            continue;
        }
        let (_, runs) = read_runs(File::open(&path)?)?;
        out.push((policy, runs));
    }
    Ok((spec, out))
}

/// Re-aggregates an experiment directory and writes its charts there.
pub fn plot_directory(dir: &Path) -> Result<Vec<PathBuf>> {
    let (spec, loaded) = load_experiment(dir)?;
    let problem = spec.problem_definition()?;
    let mut curves = Vec::new();
    for (policy, runs) in &loaded {
        if let Some(c) = summarise(&spec, &problem, *policy, runs)? {
            curves.push(c);
        }
    }
    emit_plots(&curves, dir, &chart_title(&spec, &problem))
}

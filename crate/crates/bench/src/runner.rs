//! Suite execution: scenario-level parallelism, scoring, artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use tailbench_core::metrics::{reference_progress, score_trace, scores_to_csv, suite_report, MetricConfig, ScenarioScore, SuiteReport};
use tailbench_core::scenario::{generate_benchmark_suite, scenario_to_json, ScenarioSpec, ScenarioType, SUITE_PER_TYPE};
use tailbench_core::sim::{run_closed_loop, SimConfig, SimTrace};

use crate::registry::{PlannerSpec, RegistryError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("jobs must be at least 1")]
    Jobs,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_owned(), source }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub planner: PlannerSpec,
    pub suite_seed: u64,
    /// Empty selects every type.
    pub types: Vec<ScenarioType>,
    /// Instance indices within each type; `None` selects all ten.
    pub indices: Option<Vec<usize>>,
    pub jobs: usize,
    pub out: PathBuf,
    pub metrics: MetricConfig,
}

impl RunConfig {
    pub fn new(planner: PlannerSpec, out: impl Into<PathBuf>) -> Self {
        Self {
            planner,
            suite_seed: 0,
            types: Vec::new(),
            indices: None,
            jobs: 1,
            out: out.into(),
            metrics: MetricConfig::default(),
        }
    }
}

/// Suite scenarios matching the type and index filters, in suite order.
pub fn select_scenarios(seed: u64, types: &[ScenarioType], indices: Option<&[usize]>) -> Vec<ScenarioSpec> {
    generate_benchmark_suite(seed)
        .into_iter()
        .enumerate()
        .filter(|(i, s)| {
            (types.is_empty() || types.contains(&s.kind)) && indices.map_or(true, |ix| ix.contains(&(i % SUITE_PER_TYPE)))
        })
        .map(|(_, s)| s)
        .collect()
}

/// Simulator settings for a scenario: defaults with its own duration.
pub fn sim_config(spec: &ScenarioSpec) -> SimConfig {
    SimConfig { duration: spec.duration, ..SimConfig::default() }
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub spec: ScenarioSpec,
    pub trace: SimTrace,
    pub score: ScenarioScore,
}

/// Simulates and scores one scenario. `reference` is computed when absent.
pub fn run_scenario(
    spec: &ScenarioSpec,
    planner: &PlannerSpec,
    metrics: &MetricConfig,
    reference: Option<f64>,
) -> Result<ScenarioRun, RegistryError> {
    let sim = sim_config(spec);
    let mut p = planner.build(spec.kind)?;
    let mut trace = run_closed_loop(spec, p.as_mut(), &sim);
    trace.planner = planner.label();
    let reference = reference.unwrap_or_else(|| reference_progress(spec, &sim));
    let score = score_trace(&trace, spec, metrics, reference);
    Ok(ScenarioRun { spec: spec.clone(), trace, score })
}

/// Runs `specs` on a pool of `jobs` threads; results keep input order.
pub fn run_many(
    specs: &[ScenarioSpec],
    planner: &PlannerSpec,
    metrics: &MetricConfig,
    references: &BTreeMap<String, f64>,
    jobs: usize,
) -> Result<Vec<ScenarioRun>, RunError> {
    if jobs == 0 {
        return Err(RunError::Jobs);
    }
    planner.validate()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let runs: Result<Vec<_>, RegistryError> = pool.install(|| {
        specs
            .par_iter()
            .map(|s| run_scenario(s, planner, metrics, references.get(&s.name).copied()))
            .collect()
    });
    Ok(runs?)
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct ReferenceCache {
    /// Scenario name -> (scenario JSON digest, reference progress).
    entries: BTreeMap<String, (String, f64)>,
}

fn digest(spec: &ScenarioSpec) -> String {
    hex::encode(Sha256::digest(scenario_to_json(spec).as_bytes()))
}

/// Reference progress per scenario, reusing `cache_path` entries whose
/// scenario digest still matches.
pub fn reference_table(specs: &[ScenarioSpec], cache_path: &Path, jobs: usize) -> Result<BTreeMap<String, f64>, RunError> {
    let mut cache: ReferenceCache = fs::read_to_string(cache_path)
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok())
        .unwrap_or_default();
    let digests: Vec<String> = specs.iter().map(digest).collect();
    let missing: Vec<(&ScenarioSpec, &String)> = specs
        .iter()
        .zip(&digests)
        .filter(|(s, d)| cache.entries.get(&s.name).map_or(true, |(cd, _)| cd != *d))
        .collect();
    if !missing.is_empty() {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
        let fresh: Vec<(String, String, f64)> = pool.install(|| {
            missing
                .par_iter()
                .map(|(s, d)| (s.name.clone(), (*d).clone(), reference_progress(s, &sim_config(s))))
                .collect()
        });
        for (name, d, v) in fresh {
            cache.entries.insert(name, (d, v));
        }
        let text = serde_json::to_string_pretty(&cache).expect("cache serializes");
        fs::write(cache_path, text).map_err(io_err(cache_path))?;
    }
    Ok(specs.iter().map(|s| (s.name.clone(), cache.entries[&s.name].1)).collect())
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub scores: Vec<ScenarioScore>,
    pub report: SuiteReport,
    /// Scenario name and trace hash, in suite order.
    pub trace_hashes: Vec<(String, String)>,
}

fn write(path: &Path, text: &str) -> Result<(), RunError> {
    fs::write(path, text).map_err(io_err(path))
}

/// Full benchmark run with every artifact written under `cfg.out`.
pub fn run_benchmark(cfg: &RunConfig) -> Result<RunOutput, RunError> {
    cfg.planner.validate()?;
    let dirs = ["scenarios", "traces"].map(|d| cfg.out.join(d));
    for d in &dirs {
        fs::create_dir_all(d).map_err(io_err(d))?;
    }
    let specs = select_scenarios(cfg.suite_seed, &cfg.types, cfg.indices.as_deref());
    for s in &specs {
        let p = dirs[0].join(format!("{}.json", s.name));
        write(&p, &scenario_to_json(s))?;
    }
    let references = reference_table(&specs, &cfg.out.join("reference_progress.json"), cfg.jobs)?;
    let runs = run_many(&specs, &cfg.planner, &cfg.metrics, &references, cfg.jobs)?;

    let mut trace_hashes = Vec::with_capacity(runs.len());
    for r in &runs {
        let p = dirs[1].join(format!("{}.json", r.spec.name));
        write(&p, &r.trace.to_json())?;
        trace_hashes.push((r.spec.name.clone(), r.trace.hash()));
        if !r.trace.queries.is_empty() {
            let prompts = cfg.out.join("prompts");
            fs::create_dir_all(&prompts).map_err(io_err(&prompts))?;
            let lines: Vec<String> =
                r.trace.queries.iter().map(|q| serde_json::to_string(q).expect("query serializes")).collect();
            write(&prompts.join(format!("{}.jsonl", r.spec.name)), &(lines.join("\n") + "\n"))?;
        }
    }
    let scores: Vec<ScenarioScore> = runs.into_iter().map(|r| r.score).collect();
    let report = suite_report(&cfg.planner.label(), &scores);
    write(&cfg.out.join("scores.csv"), &scores_to_csv(&scores))?;
    write(&cfg.out.join("report.md"), &report.to_markdown())?;
    write(&cfg.out.join("report.json"), &serde_json::to_string_pretty(&report).expect("report serializes"))?;
    Ok(RunOutput { scores, report, trace_hashes })
}

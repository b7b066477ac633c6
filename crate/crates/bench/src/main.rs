use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tailbench::{compare_files, render_svg, run_benchmark, PlannerSpec, RunConfig};
use tailbench_core::metrics::MetricConfig;
use tailbench_core::scenario::{generate_benchmark_suite, load_scenario, save_scenario, ScenarioType};
use tailbench_core::sim::SimTrace;

#[derive(Parser)]
#[command(name = "bench", version, about = "Closed-loop long-tail driving benchmark")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a planner over the benchmark suite and write traces and reports.
    Run {
        #[arg(long)]
        planner: String,
        #[arg(long, default_value_t = 0)]
        suite_seed: u64,
        /// Comma-separated scenario types (e.g. nudge,ltd); all when omitted.
        #[arg(long, value_delimiter = ',')]
        types: Vec<String>,
        /// Comma-separated instance indices within each type (0-9).
        #[arg(long, value_delimiter = ',')]
        indices: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        metric_config: Option<PathBuf>,
        /// Planner override, key=value; repeatable.
        #[arg(long = "planner-param")]
        planner_params: Vec<String>,
    },
    /// Write the suite's scenario files.
    Generate {
        #[arg(long, default_value_t = 0)]
        suite_seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a scenario, optionally at a tick of a recorded trace.
    Render {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        tick: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Combine saved reports into one Markdown table.
    Compare {
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cmd: Cmd) -> Result<(), String> {
    match cmd {
        Cmd::Run { planner, suite_seed, types, indices, jobs, out, metric_config, planner_params } => {
            let planner = PlannerSpec::new(planner)
                .with_params(planner_params.iter().map(String::as_str))
                .map_err(|e| e.to_string())?;
            let types = types
                .iter()
                .map(|t| ScenarioType::from_slug(t).ok_or_else(|| format!("unknown scenario type {t:?}")))
                .collect::<Result<Vec<_>, _>>()?;
            let metrics = match metric_config {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))?;
                    MetricConfig::from_json(&text).map_err(|e| e.to_string())?
                }
                None => MetricConfig::default(),
            };
            let cfg = RunConfig {
                planner,
                suite_seed,
                types,
                indices: (!indices.is_empty()).then_some(indices),
                jobs,
                out,
                metrics,
            };
            let result = run_benchmark(&cfg).map_err(|e| e.to_string())?;
            print!("{}", result.report.to_markdown());
            eprintln!("{} scenarios, artifacts in {}", result.scores.len(), cfg.out.display());
            Ok(())
        }
        Cmd::Generate { suite_seed, out } => {
            std::fs::create_dir_all(&out).map_err(|e| format!("{}: {e}", out.display()))?;
            for s in generate_benchmark_suite(suite_seed) {
                save_scenario(&s, &out.join(format!("{}.json", s.name))).map_err(|e| e.to_string())?;
            }
            Ok(())
        }
        Cmd::Render { scenario, trace, tick, out } => {
            let spec = load_scenario(&scenario).map_err(|e| format!("{}: {e}", scenario.display()))?;
            let trace = trace
                .map(|p| SimTrace::load(&p).map_err(|e| format!("{}: {e}", p.display())))
                .transpose()?;
            std::fs::write(&out, render_svg(&spec, trace.as_ref(), tick)).map_err(|e| format!("{}: {e}", out.display()))
        }
        Cmd::Compare { reports, out } => {
            let md = compare_files(&reports)?;
            std::fs::write(&out, &md).map_err(|e| format!("{}: {e}", out.display()))?;
            print!("{md}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

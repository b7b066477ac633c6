//! Benchmark runner, planner registry, report comparison and SVG rendering
//! behind the `bench` command.

pub mod registry;
pub mod render;
pub mod runner;

use std::path::Path;

use tailbench_core::metrics::{compare_reports, SuiteReport};

pub use registry::{PlannerSpec, RegistryError, PLANNER_NAMES};
pub use render::render_svg;
pub use runner::{reference_table, run_benchmark, run_many, run_scenario, select_scenarios, sim_config, RunConfig, RunError, RunOutput, ScenarioRun};

/// Loads a `report.json`, or the one inside a run directory.
pub fn load_report(path: &Path) -> Result<SuiteReport, String> {
    let file = if path.is_dir() { path.join("report.json") } else { path.to_owned() };
    let text = std::fs::read_to_string(&file).map_err(|e| format!("{}: {e}", file.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", file.display()))
}

/// Leaderboard over several saved reports, rows in argument order.
pub fn compare_files(paths: &[impl AsRef<Path>]) -> Result<String, String> {
    let reports = paths.iter().map(|p| load_report(p.as_ref())).collect::<Result<Vec<_>, _>>()?;
    Ok(compare_reports(&reports))
}

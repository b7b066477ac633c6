use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::map::{LaneGraph, Route};

use super::{AgentSet, EgoStart, ObstacleSpec, ScenarioSpec, ScenarioType};

pub const SCHEMA_VERSION: &str = "v1";

#[derive(Debug, Error)]
pub enum ScenarioIoError {
    #[error("malformed scenario file: {0}")]
    Malformed(String),
    #[error("unsupported scenario schema version {found:?} (expected {SCHEMA_VERSION:?})")]
    Version { found: String },
    #[error("invalid scenario: {0}")]
    Invalid(#[from] super::SpecError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
struct FileRepr {
    version: String,
    name: String,
    #[serde(rename = "type")]
    kind: ScenarioType,
    seed: u64,
    map: LaneGraph,
    ego: EgoStart,
    agents: AgentSet,
    obstacles: Vec<ObstacleSpec>,
    route: Route,
    duration: f64,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: Option<String>,
}

pub fn scenario_to_json(spec: &ScenarioSpec) -> String {
    let repr = FileRepr {
        version: SCHEMA_VERSION.to_owned(),
        name: spec.name.clone(),
        kind: spec.kind,
        seed: spec.seed,
        map: spec.graph.clone(),
        ego: spec.ego,
        agents: spec.agents.clone(),
        obstacles: spec.obstacles.clone(),
        route: spec.route.clone(),
        duration: spec.duration,
    };
    serde_json::to_string_pretty(&repr).expect("scenario serializes")
}

pub fn scenario_from_json(text: &str) -> Result<ScenarioSpec, ScenarioIoError> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(|e| ScenarioIoError::Malformed(e.to_string()))?;
    match probe.version.as_deref() {
        Some(SCHEMA_VERSION) => {}
        Some(other) => return Err(ScenarioIoError::Version { found: other.to_owned() }),
        None => return Err(ScenarioIoError::Malformed("missing version field".into())),
    }
    let r: FileRepr = serde_json::from_str(text).map_err(|e| ScenarioIoError::Malformed(e.to_string()))?;
    let spec = ScenarioSpec {
        name: r.name,
        kind: r.kind,
        seed: r.seed,
        graph: r.map,
        ego: r.ego,
        agents: r.agents,
        obstacles: r.obstacles,
        route: r.route,
        duration: r.duration,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn save_scenario(spec: &ScenarioSpec, path: &Path) -> Result<(), ScenarioIoError> {
    fs::write(path, scenario_to_json(spec))?;
    Ok(())
}

pub fn load_scenario(path: &Path) -> Result<ScenarioSpec, ScenarioIoError> {
    scenario_from_json(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::generate_benchmark_suite;

    #[test]
    fn suite_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        for spec in generate_benchmark_suite(7) {
            let p = dir.path().join(format!("{}.json", spec.name));
            save_scenario(&spec, &p).unwrap();
            assert_eq!(load_scenario(&p).unwrap(), spec);
        }
    }

    #[test]
    fn serialization_is_deterministic() {
        let a: Vec<String> = generate_benchmark_suite(3).iter().map(scenario_to_json).collect();
        let b: Vec<String> = generate_benchmark_suite(3).iter().map(scenario_to_json).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn truncated_and_wrong_version_rejected() {
        let text = scenario_to_json(&generate_benchmark_suite(1)[0]);
        assert!(matches!(scenario_from_json(&text[..text.len() / 2]), Err(ScenarioIoError::Malformed(_))));
        let old = text.replacen("\"version\": \"v1\"", "\"version\": \"v0\"", 1);
        assert!(matches!(scenario_from_json(&old), Err(ScenarioIoError::Version { .. })));
    }
}

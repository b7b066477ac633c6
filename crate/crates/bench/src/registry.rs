//! Planner construction by name, with `key=value` parameter overrides.

use std::collections::BTreeMap;

use thiserror::Error;

use tailbench_core::llm::{ClientConfig, HttpClient, LlmError, LlmSelector, ScriptedOracle};
use tailbench_core::planners::{
    HybridPlanner, IdmMobilPlanner, IdmPlanner, Planner, SamplingConfig, SamplingPlanner, WaypointsPlanner,
};
use tailbench_core::scenario::ScenarioType;

pub const PLANNER_NAMES: [&str; 5] = ["idm", "idm_mobil", "sampling", "hybrid", "waypoints_llm"];

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("unknown planner {0:?} (known: {names})", names = PLANNER_NAMES.join(", "))]
    UnknownPlanner(String),
    #[error("planner {planner} has no parameter {key:?}")]
    UnknownParam { planner: String, key: String },
    #[error("bad value {value:?} for {key}")]
    BadValue { key: String, value: String },
    #[error("malformed parameter {0:?}, expected key=value")]
    Malformed(String),
    #[error("LLM client: {0}")]
    Llm(#[from] LlmError),
}

/// A planner name plus overrides; cheap to clone into worker threads.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerSpec {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

impl PlannerSpec {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), params: BTreeMap::new() }
    }

    /// Parses `key=value` pairs.
    pub fn with_params<'a>(mut self, pairs: impl IntoIterator<Item = &'a str>) -> Result<Self, RegistryError> {
        for p in pairs {
            let (k, v) = p.split_once('=').ok_or_else(|| RegistryError::Malformed(p.to_owned()))?;
            self.params.insert(k.trim().to_owned(), v.trim().to_owned());
        }
        Ok(self)
    }

    /// Whether the planner talks to an LLM endpoint.
    pub fn uses_llm(&self) -> bool {
        self.name == "waypoints_llm" || (self.name == "hybrid" && self.params.get("selector").map(String::as_str) == Some("llm"))
    }

    /// Label used in reports: the name plus any overrides.
    pub fn label(&self) -> String {
        if self.params.is_empty() {
            return self.name.clone();
        }
        let kv: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}[{}]", self.name, kv.join(","))
    }

    fn allowed(&self) -> Result<&'static [&'static str], RegistryError> {
        const IDM: &[&str] = &["time_headway", "jam_distance", "max_accel", "comfort_decel"];
        const MOBIL: &[&str] =
            &["time_headway", "jam_distance", "max_accel", "comfort_decel", "politeness", "a_threshold", "b_safe", "route_bias"];
        const SAMPLING: &[&str] = &["window", "w_progress", "w_ttc", "w_lateral", "w_comfort"];
        const HYBRID: &[&str] = &["window", "w_progress", "w_ttc", "w_lateral", "w_comfort", "selector", "min_dwell"];
        Ok(match self.name.as_str() {
            "idm" => IDM,
            "idm_mobil" => MOBIL,
            "sampling" => SAMPLING,
            "hybrid" => HYBRID,
            "waypoints_llm" => &[],
            other => return Err(RegistryError::UnknownPlanner(other.to_owned())),
        })
    }

    fn num(&self, key: &str) -> Result<Option<f64>, RegistryError> {
        self.params
            .get(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| RegistryError::BadValue { key: key.to_owned(), value: v.clone() })
            })
            .transpose()
    }

    /// Checks the name and every override without building anything.
    pub fn validate(&self) -> Result<(), RegistryError> {
        let allowed = self.allowed()?;
        for (k, v) in &self.params {
            if !allowed.contains(&k.as_str()) {
                return Err(RegistryError::UnknownParam { planner: self.name.clone(), key: k.clone() });
            }
            if k == "selector" {
                if v != "oracle" && v != "llm" {
                    return Err(RegistryError::BadValue { key: k.clone(), value: v.clone() });
                }
            } else {
                self.num(k)?;
            }
        }
        if self.uses_llm() {
            ClientConfig::from_env()?;
        }
        Ok(())
    }

    fn sampling_config(&self) -> Result<SamplingConfig, RegistryError> {
        let mut c = SamplingConfig::default();
        if let Some(w) = self.num("window")? {
            c.window = w;
        }
        let w = &mut c.weights;
        for (key, slot) in [
            ("w_progress", &mut w.progress),
            ("w_ttc", &mut w.ttc),
            ("w_lateral", &mut w.lateral),
            ("w_comfort", &mut w.comfort),
        ] {
            if let Some(v) = self.num(key)? {
                *slot = v;
            }
        }
        Ok(c)
    }

    fn idm_overrides(&self, p: &mut tailbench_core::Idm) -> Result<(), RegistryError> {
        for (key, slot) in [
            ("time_headway", &mut p.time_headway),
            ("jam_distance", &mut p.jam_distance),
            ("max_accel", &mut p.max_accel),
            ("comfort_decel", &mut p.comfort_decel),
        ] {
            if let Some(v) = self.num(key)? {
                *slot = v;
            }
        }
        Ok(())
    }

    /// Builds a fresh planner for one scenario of type `kind`.
    pub fn build(&self, kind: ScenarioType) -> Result<Box<dyn Planner>, RegistryError> {
        self.validate()?;
        Ok(match self.name.as_str() {
            "idm" => {
                let mut p = IdmPlanner::default();
                self.idm_overrides(&mut p.params)?;
                Box::new(p)
            }
            "idm_mobil" => {
                let mut p = IdmMobilPlanner::default();
                self.idm_overrides(&mut p.idm)?;
                let m = &mut p.mobil;
                for (key, slot) in [
                    ("politeness", &mut m.politeness),
                    ("a_threshold", &mut m.a_threshold),
                    ("b_safe", &mut m.b_safe),
                    ("route_bias", &mut m.route_bias),
                ] {
                    if let Some(v) = self.num(key)? {
                        *slot = v;
                    }
                }
                Box::new(p)
            }
            "sampling" => Box::new(SamplingPlanner::new(self.sampling_config()?)),
            "hybrid" => {
                let selector: Box<dyn tailbench_core::llm::BehaviorSelector> = if self.uses_llm() {
                    Box::new(LlmSelector::new(Box::new(HttpClient::new(ClientConfig::from_env()?)?)))
                } else {
                    Box::new(ScriptedOracle::new(kind))
                };
                let mut h = HybridPlanner::new(selector, self.sampling_config()?);
                if let Some(d) = self.num("min_dwell")? {
                    h.min_dwell = d;
                }
                Box::new(h)
            }
            "waypoints_llm" => Box::new(WaypointsPlanner::new(Box::new(HttpClient::new(ClientConfig::from_env()?)?))),
            other => return Err(RegistryError::UnknownPlanner(other.to_owned())),
        })
    }
}

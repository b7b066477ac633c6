use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::agents::PedestrianPhase;
use crate::geometry::{OrientedBox, Vec2};
use crate::map::LaneId;
use crate::planners::{BehaviorLabel, QueryRecord, TrajPoint};
use crate::scenario::ScenarioType;

use super::{ActorRef, EgoState};

pub const TRACE_VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSnapshot {
    pub id: u32,
    pub lane: LaneId,
    pub s: f64,
    #[serde(rename = "box")]
    pub bbox: OrientedBox<f64>,
    pub speed: f64,
    pub velocity: Vec2<f64>,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PedestrianSnapshot {
    pub id: u32,
    #[serde(rename = "box")]
    pub bbox: OrientedBox<f64>,
    pub velocity: Vec2<f64>,
    pub phase: PedestrianPhase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub tick: usize,
    pub t: f64,
    pub ego: EgoState,
    pub agents: Vec<AgentSnapshot>,
    pub pedestrians: Vec<PedestrianSnapshot>,
    /// Plan executed from this tick, every fifth sample; absent on the last tick.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<Vec<TrajPoint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behavior: Option<BehaviorLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventKind {
    /// Ego contact onset.
    Collision { other: ActorRef, at_fault: bool },
    /// Contact onset between two agents; logged only.
    AgentCollision { a: u32, b: u32 },
    /// Ego footprint left the drivable area beyond tolerance.
    AreaExit { fraction: f64 },
    BehaviorSwitch { from: Option<BehaviorLabel>, to: BehaviorLabel },
    PlannerFallback { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub tick: usize,
    pub t: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub version: String,
    pub scenario: String,
    #[serde(rename = "type")]
    pub kind: ScenarioType,
    pub seed: u64,
    pub planner: String,
    pub dt: f64,
    pub snapshots: Vec<Snapshot>,
    pub events: Vec<SimEvent>,
    /// LLM exchanges, in call order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub queries: Vec<QueryRecord>,
}

#[derive(Debug, Error)]
pub enum TraceIoError {
    #[error("malformed trace: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("unsupported trace version {0:?}")]
    Version(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SimTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TraceIoError> {
        #[derive(Deserialize)]
        struct Probe {
            version: String,
        }
        let probe: Probe = serde_json::from_str(text)?;
        if probe.version != TRACE_VERSION {
            return Err(TraceIoError::Version(probe.version));
        }
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), TraceIoError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, TraceIoError> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// SHA-256 of the serialized trace, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn duration(&self) -> f64 {
        self.snapshots.last().map_or(0.0, |s| s.t)
    }
}

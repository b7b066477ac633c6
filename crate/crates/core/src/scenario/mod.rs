//! Procedural long-tail scenarios and the fixed benchmark suite.

mod io;
mod maps;
mod placement;
mod rng;
mod scripted;
mod suite;
mod traffic;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{AgentState, PedestrianState};
use crate::geometry::{boxes_collide, OrientedBox, Pose2D};
use crate::map::{LaneGraph, LaneId, Route, RouteError};

pub use io::{load_scenario, save_scenario, scenario_from_json, scenario_to_json, ScenarioIoError, SCHEMA_VERSION};
pub use maps::{build_base_map, build_map, lane_id, opposing_lane_id, MapError, MapKind, MapParams, DEFAULT_SPEED_LIMIT};
pub use placement::{
    augment_goal_for_lane_changes, place_accident_site, place_construction_zone, place_jaywalker,
    place_parked_vehicle, AccidentPattern, ParkedVariant, PlacementError, BUS_LENGTH, BUS_WIDTH, CONE_SIZE,
    JAYWALK_BRAKING, MAX_NUDGE_ENCROACHMENT, MIN_HAZARD_AHEAD, PEDESTRIAN_START_OUTSIDE,
};
pub use rng::ScenarioRng;
pub use scripted::{scripted_crossing, SCRIPTED_DURATION};
pub use suite::{build_instance, generate_benchmark_suite, SCENARIO_DURATION, SUITE_PER_TYPE};
pub use traffic::{assign_policies, spawn_traffic, SpawnRegion, MIN_SPAWN_GAP, MIXED_ASSERTIVE_P};

pub const EGO_LENGTH: f64 = 4.8;
/// Obstacles may sit this far beside their lane, e.g. on the shoulder, m.
pub const OBSTACLE_LANE_MARGIN: f64 = 1.0;
pub const EGO_WIDTH: f64 = 2.0;
pub const CAR_LENGTH: f64 = 4.6;
pub const CAR_WIDTH: f64 = 1.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioType {
    Construction,
    Accident,
    Jaywalker,
    Nudge,
    Overtake,
    LaneChangeLtd,
    LaneChangeMtd,
    LaneChangeHtd,
}

impl ScenarioType {
    pub const ALL: [ScenarioType; 8] = [
        ScenarioType::Construction,
        ScenarioType::Accident,
        ScenarioType::Jaywalker,
        ScenarioType::Nudge,
        ScenarioType::Overtake,
        ScenarioType::LaneChangeLtd,
        ScenarioType::LaneChangeMtd,
        ScenarioType::LaneChangeHtd,
    ];

    pub fn is_lane_change(self) -> bool {
        self.density().is_some()
    }

    pub fn density(self) -> Option<TrafficDensity> {
        match self {
            ScenarioType::LaneChangeLtd => Some(TrafficDensity::LTD),
            ScenarioType::LaneChangeMtd => Some(TrafficDensity::MTD),
            ScenarioType::LaneChangeHtd => Some(TrafficDensity::HTD),
            _ => None,
        }
    }

    /// Types that must drive through the oncoming lane; exempt from the
    /// driving-direction penalty.
    pub fn oncoming_pass_expected(self) -> bool {
        matches!(self, ScenarioType::Overtake | ScenarioType::Accident)
    }

    /// Stable snake-case identifier.
    pub fn slug(self) -> &'static str {
        match self {
            ScenarioType::Construction => "construction",
            ScenarioType::Accident => "accident",
            ScenarioType::Jaywalker => "jaywalker",
            ScenarioType::Nudge => "nudge",
            ScenarioType::Overtake => "overtake",
            ScenarioType::LaneChangeLtd => "lane_change_ltd",
            ScenarioType::LaneChangeMtd => "lane_change_mtd",
            ScenarioType::LaneChangeHtd => "lane_change_htd",
        }
    }

    /// Short column header used in report tables.
    pub fn column(self) -> &'static str {
        match self {
            ScenarioType::Construction => "Constr.",
            ScenarioType::Accident => "Acc.",
            ScenarioType::Jaywalker => "Jayw.",
            ScenarioType::Nudge => "Nudge",
            ScenarioType::Overtake => "Overt.",
            ScenarioType::LaneChangeLtd => "LTD",
            ScenarioType::LaneChangeMtd => "MTD",
            ScenarioType::LaneChangeHtd => "HTD",
        }
    }

    pub fn from_slug(s: &str) -> Option<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' ', '.'], "_");
        Self::ALL.into_iter().find(|t| {
            t.slug() == norm
                || t.column().to_ascii_lowercase().trim_end_matches('.') == norm.trim_end_matches('_')
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DensityLabel {
    #[serde(rename = "LTD")]
    Low,
    #[serde(rename = "MTD")]
    Medium,
    #[serde(rename = "HTD")]
    High,
}

/// Traffic density as the largest bumper-to-bumper spawn gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficDensity {
    pub label: DensityLabel,
    pub max_gap: f64,
}

impl TrafficDensity {
    pub const LTD: TrafficDensity = TrafficDensity { label: DensityLabel::Low, max_gap: 100.0 };
    pub const MTD: TrafficDensity = TrafficDensity { label: DensityLabel::Medium, max_gap: 50.0 };
    pub const HTD: TrafficDensity = TrafficDensity { label: DensityLabel::High, max_gap: 33.0 };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyMode {
    Conservative,
    Assertive,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstacleKind {
    Cone,
    ParkedVehicle,
    CrashedVehicle,
    StoppedBus,
}

impl ObstacleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ObstacleKind::Cone => "cone",
            ObstacleKind::ParkedVehicle => "parked_vehicle",
            ObstacleKind::CrashedVehicle => "crashed_vehicle",
            ObstacleKind::StoppedBus => "stopped_bus",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSpec {
    pub kind: ObstacleKind,
    #[serde(rename = "box")]
    pub bbox: OrientedBox<f64>,
    pub lane: LaneId,
}

impl ObstacleSpec {
    /// Whether the box overlaps the corridor of its declared lane.
    pub fn overlaps_lane(&self, g: &LaneGraph) -> bool {
        self.within_lane_band(g, 0.0)
    }

    /// Like `overlaps_lane` with the corridor widened by `margin` on each side.
    pub fn within_lane_band(&self, g: &LaneGraph, margin: f64) -> bool {
        g.lane(&self.lane).is_some_and(|l| {
            let e = l.centerline.box_extent(&self.bbox);
            let half = 0.5 * l.width + margin;
            e.overlaps_band(-half, half) && e.s_max > 0.0 && e.s_min < l.length()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoStart {
    pub pose: Pose2D<f64>,
    pub speed: f64,
}

impl EgoStart {
    pub fn bbox(&self) -> OrientedBox<f64> {
        OrientedBox::new(self.pose, EGO_LENGTH, EGO_WIDTH)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AgentSet {
    pub vehicles: Vec<AgentState>,
    pub pedestrians: Vec<PedestrianState>,
}

/// Complete, serializable description of one closed-loop scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub kind: ScenarioType,
    pub seed: u64,
    pub graph: LaneGraph,
    pub ego: EgoStart,
    pub agents: AgentSet,
    pub obstacles: Vec<ObstacleSpec>,
    pub route: Route,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("duration must be positive")]
    Duration,
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error("ego does not start on the route's first lane")]
    EgoOffRoute,
    #[error("initial overlap between {0} and {1}")]
    Overlap(String, String),
    #[error("agent {0} is not on a known lane")]
    AgentLane(u32),
    #[error("obstacle {0} is neither on nor beside its lane")]
    ObstacleLane(usize),
}

impl ScenarioSpec {
    /// Labeled boxes of every actor at t = 0.
    pub fn initial_boxes(&self) -> Vec<(String, OrientedBox<f64>)> {
        let mut out = vec![("ego".to_owned(), self.ego.bbox())];
        for a in &self.agents.vehicles {
            out.push((format!("agent{}", a.id), a.bbox(&self.graph)));
        }
        for p in &self.agents.pedestrians {
            out.push((format!("pedestrian{}", p.id), p.bbox()));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            out.push((format!("obstacle{i}"), o.bbox));
        }
        out
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if !(self.duration > 0.0) {
            return Err(SpecError::Duration);
        }
        self.route.validate(&self.graph)?;
        let first = self.graph.lane(self.route.first_lane()).expect("route validated");
        if !first.contains(self.ego.pose.position()) {
            return Err(SpecError::EgoOffRoute);
        }
        for a in &self.agents.vehicles {
            if self.graph.lane(&a.lane).is_none() {
                return Err(SpecError::AgentLane(a.id));
            }
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !o.within_lane_band(&self.graph, OBSTACLE_LANE_MARGIN) {
                return Err(SpecError::ObstacleLane(i));
            }
        }
        let boxes = self.initial_boxes();
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                // crashed vehicles intersect each other on purpose
                let both_crashed = boxes[i].0.starts_with("obstacle")
                    && boxes[j].0.starts_with("obstacle")
                    && self.is_crashed(&boxes[i].0)
                    && self.is_crashed(&boxes[j].0);
                if !both_crashed && boxes_collide(&boxes[i].1, &boxes[j].1) {
                    return Err(SpecError::Overlap(boxes[i].0.clone(), boxes[j].0.clone()));
                }
            }
        }
        Ok(())
    }

    fn is_crashed(&self, label: &str) -> bool {
        label
            .strip_prefix("obstacle")
            .and_then(|i| i.parse::<usize>().ok())
            .and_then(|i| self.obstacles.get(i))
            .is_some_and(|o| o.kind == ObstacleKind::CrashedVehicle)
    }

    pub fn ego_lane(&self) -> &LaneId {
        self.route.first_lane()
    }

    /// Arclength of the ego center on its starting lane.
    pub fn ego_s(&self) -> f64 {
        self.graph
            .lane(self.ego_lane())
            .map(|l| l.project(self.ego.pose.position()).s)
            .unwrap_or(0.0)
    }

    /// Obstacles that sit in a route lane's corridor, i.e. must be passed.
    pub fn blocking_obstacles(&self) -> impl Iterator<Item = &ObstacleSpec> {
        self.obstacles
            .iter()
            .filter(|o| self.route.lane_sequence.contains(&o.lane) && o.overlaps_lane(&self.graph))
    }

    pub(crate) fn next_agent_id(&self) -> u32 {
        self.agents
            .vehicles
            .iter()
            .map(|a| a.id + 1)
            .chain(self.agents.pedestrians.iter().map(|p| p.id + 1))
            .max()
            .unwrap_or(0)
    }
}

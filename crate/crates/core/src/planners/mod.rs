//! Planners under test and their shared contract.

mod behavior;
mod hybrid;
mod idm_planner;
mod mobil;
mod reference;
mod sampling;
mod waypoints;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{OrientedBox, Pose2D, Vec2};
use crate::map::{LaneGraph, LaneId, LaneSegment, Route};
use crate::scalar::normalize_angle;
use crate::scenario::ObstacleSpec;

pub use behavior::{enumerate_behaviors, BehaviorLabel, BehaviorOption, Blocker, BLOCKER_LOOKAHEAD};
pub use hybrid::{HybridPlanner, QUERY_PERIOD};
pub use idm_planner::{idm_planner_plan, IdmPlanner};
pub use mobil::{idm_mobil_plan, mobil_decide, IdmMobilPlanner, MobilParams};
pub use reference::{ReferencePath, Tracks};
pub use sampling::{
    evaluate_candidates, sampling_planner_plan, CandidateEval, CostWeights, SamplingConfig, SamplingPlanner,
    LATERAL_DELTAS, SPEED_FRACTIONS,
};
pub use waypoints::{interpolate_waypoints, waypoints_llm_plan, WaypointsPlanner, WAYPOINT_DT};

/// Planning horizon, s.
pub const HORIZON: f64 = 8.0;
/// Internal trajectory sample spacing, s.
pub const TRAJ_DT: f64 = 0.1;
pub const TRAJ_SAMPLES: usize = 81;
/// Largest curvature a trajectory may demand, 1/m.
pub const MAX_CURVATURE: f64 = 0.5;
/// Deceleration of the brake fallback, m/s^2.
pub const FALLBACK_DECEL: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoObs {
    pub bbox: OrientedBox<f64>,
    pub speed: f64,
    pub accel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentObs {
    pub id: u32,
    pub bbox: OrientedBox<f64>,
    pub speed: f64,
    pub lane: LaneId,
    pub velocity: Vec2<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PedestrianObs {
    pub id: u32,
    pub position: Vec2<f64>,
    pub velocity: Vec2<f64>,
}

impl PedestrianObs {
    pub fn bbox(&self) -> OrientedBox<f64> {
        let heading = if self.velocity.norm() > 1e-9 { self.velocity.angle() } else { 0.0 };
        let size = crate::agents::PEDESTRIAN_SIZE;
        OrientedBox::new(Pose2D::new(self.position.x, self.position.y, heading), size, size)
    }
}

/// Noise-free snapshot of one tick, as handed to a planner.
#[derive(Debug, Clone)]
pub struct Observation<'a> {
    pub ego: EgoObs,
    pub agents: Vec<AgentObs>,
    pub pedestrians: Vec<PedestrianObs>,
    pub obstacles: Vec<ObstacleSpec>,
    pub graph: &'a LaneGraph,
    pub route: &'a Route,
    pub time: f64,
}

impl Observation<'_> {
    /// Lane the ego is driving in: the nearest same-direction lane,
    /// preferring lanes on the route when the ego is inside one.
    pub fn current_lane(&self) -> &LaneSegment {
        let p = self.ego.bbox.center.position();
        let h = self.ego.bbox.center.heading;
        let same_dir = |l: &&LaneSegment| {
            let f = l.project(p);
            normalize_angle(l.centerline.heading_at(f.s) - h).abs() <= std::f64::consts::FRAC_PI_2
        };
        let on_route = self
            .graph
            .lanes()
            .filter(|l| self.route.lane_sequence.contains(&l.id))
            .filter(same_dir)
            .filter(|l| l.contains(p))
            .min_by(|a, b| a.project(p).d.abs().total_cmp(&b.project(p).d.abs()));
        on_route
            .or_else(|| self.graph.nearest_lane(p, Some(h)).map(|(l, _)| l))
            .or_else(|| self.graph.nearest_lane(p, None).map(|(l, _)| l))
            .expect("graph has at least one lane")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajPoint {
    pub t: f64,
    pub pose: Pose2D<f64>,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajPoint>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("trajectory needs at least two samples")]
    TooShort,
    #[error("time must start at 0 and strictly increase (sample {0})")]
    Time(usize),
    #[error("invalid speed at sample {0}")]
    Speed(usize),
    #[error("curvature {kappa:.3} exceeds the limit at sample {index}")]
    Curvature { index: usize, kappa: f64 },
}

impl Trajectory {
    pub fn validate(&self) -> Result<(), TrajectoryError> {
        let s = &self.samples;
        if s.len() < 2 {
            return Err(TrajectoryError::TooShort);
        }
        if s[0].t != 0.0 {
            return Err(TrajectoryError::Time(0));
        }
        for (i, p) in s.iter().enumerate() {
            if !(p.speed.is_finite() && p.speed >= 0.0) || !p.pose.x.is_finite() || !p.pose.y.is_finite() {
                return Err(TrajectoryError::Speed(i));
            }
            if i > 0 && !(p.t > s[i - 1].t) {
                return Err(TrajectoryError::Time(i));
            }
        }
        for i in 1..s.len() {
            if let Some(kappa) = step_curvature(&s[i - 1].pose, &s[i].pose) {
                if kappa > MAX_CURVATURE + 1e-6 {
                    return Err(TrajectoryError::Curvature { index: i, kappa });
                }
            }
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |p| p.t)
    }

    /// Pose and speed at time `t`, linearly interpolated and clamped.
    pub fn at(&self, t: f64) -> TrajPoint {
        let s = &self.samples;
        if t <= s[0].t {
            return s[0];
        }
        let i = s.partition_point(|p| p.t <= t);
        if i >= s.len() {
            return *s.last().expect("non-empty");
        }
        let (a, b) = (s[i - 1], s[i]);
        let f = (t - a.t) / (b.t - a.t);
        let dh = normalize_angle(b.pose.heading - a.pose.heading);
        TrajPoint {
            t,
            pose: Pose2D::new(
                a.pose.x + f * (b.pose.x - a.pose.x),
                a.pose.y + f * (b.pose.y - a.pose.y),
                a.pose.heading + f * dh,
            ),
            speed: a.speed + f * (b.speed - a.speed),
        }
    }
}

/// Heading change per distance between two poses; `None` when they are
/// too close for the ratio to mean anything.
pub(crate) fn step_curvature(a: &Pose2D<f64>, b: &Pose2D<f64>) -> Option<f64> {
    let ds = a.position().dist(b.position());
    (ds > 0.05).then(|| normalize_angle(b.heading - a.heading).abs() / ds)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("planner failure: {0}")]
    Internal(String),
    #[error("invalid trajectory: {0}")]
    Invalid(#[from] TrajectoryError),
    #[error("selector failure: {0}")]
    Selector(String),
}

/// One LLM exchange, kept for auditing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub time: f64,
    pub system: String,
    pub user: String,
    pub response: Option<String>,
    pub error: Option<String>,
    pub decision: Option<String>,
}

pub trait Planner: Send {
    fn name(&self) -> &str;

    fn plan(&mut self, obs: &Observation<'_>) -> Result<Trajectory, PlanError>;

    /// Behavior currently conditioning the plan, if the planner has one.
    fn behavior(&self) -> Option<BehaviorLabel> {
        None
    }

    /// Drains the LLM exchanges made since the last call.
    fn take_queries(&mut self) -> Vec<QueryRecord> {
        Vec::new()
    }
}

/// Runs `planner`, substituting the brake fallback for any error or
/// invalid output. The flag reports whether the fallback was used.
pub fn plan_with_fallback(planner: &mut dyn Planner, obs: &Observation<'_>) -> (Trajectory, Option<PlanError>) {
    match planner.plan(obs).and_then(|t| t.validate().map(|_| t).map_err(PlanError::from)) {
        Ok(t) => (t, None),
        Err(e) => (brake_fallback(obs), Some(e)),
    }
}

/// Straight-ahead stop along the current lane at `FALLBACK_DECEL`.
pub fn brake_fallback(obs: &Observation<'_>) -> Trajectory {
    let lane = obs.current_lane();
    let path = ReferencePath::along_lane(obs.graph, &lane.id, Some(obs.route));
    let f = path.project(obs.ego.bbox.center.position());
    let speeds = stop_profile(obs.ego.speed, FALLBACK_DECEL);
    path.build_trajectory(f, &obs.ego, f.d, &speeds)
}

/// Constant-deceleration speed samples down to standstill.
pub(crate) fn stop_profile(v0: f64, decel: f64) -> Vec<f64> {
    (0..TRAJ_SAMPLES).map(|k| (v0 - decel * k as f64 * TRAJ_DT).max(0.0)).collect()
}

/// Test double whose `plan` always fails.
#[derive(Debug, Default, Clone)]
pub struct FailingPlanner;

impl Planner for FailingPlanner {
    fn name(&self) -> &str {
        "failing"
    }

    fn plan(&mut self, _obs: &Observation<'_>) -> Result<Trajectory, PlanError> {
        Err(PlanError::Internal("injected failure".into()))
    }
}

#[cfg(test)]
pub(crate) mod testutil;

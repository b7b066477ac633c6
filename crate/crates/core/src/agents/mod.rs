//! Reactive background traffic: IDM vehicles and triggered pedestrians.

mod idm;
mod pedestrian;

use serde::{Deserialize, Serialize};

use crate::geometry::{OrientedBox, Polyline, Pose2D, Vec2};
use crate::map::{LaneGraph, LaneId, LaneSegment};
use crate::scenario::ObstacleSpec;

pub use idm::{idm_acceleration, idm_terms, IdmParams, NonPositiveGap, EMERGENCY_DECEL};
pub use pedestrian::{step_pedestrian, PedestrianPhase, PedestrianState, PEDESTRIAN_SIZE};

/// How a vehicle agent perceives the ego vehicle entering its lane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentPolicy {
    /// Brakes as soon as any part of the ego footprint is in its lane.
    Conservative,
    /// Reacts only once the ego has fully merged into its lane.
    Assertive,
}

/// Lane-keeping IDM vehicle. Pose is derived from `(lane, s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: u32,
    pub lane: LaneId,
    /// Arclength of the box center along the lane centerline.
    pub s: f64,
    pub speed: f64,
    pub length: f64,
    pub width: f64,
    pub policy: AgentPolicy,
    pub params: IdmParams<f64>,
    /// Cleared once the agent runs off the end of a lane with no successor.
    #[serde(default = "yes")]
    pub active: bool,
}

fn yes() -> bool {
    true
}

impl AgentState {
    pub fn bbox(&self, g: &LaneGraph) -> OrientedBox<f64> {
        let lane = g.lane(&self.lane).expect("agent lane exists in graph");
        let (p, t) = lane.centerline.sample(self.s);
        OrientedBox::new(Pose2D::new(p.x, p.y, t.angle()), self.length, self.width)
    }

    pub fn velocity(&self, g: &LaneGraph) -> Vec2<f64> {
        let lane = g.lane(&self.lane).expect("agent lane exists in graph");
        lane.centerline.sample(self.s).1 * self.speed
    }
}

/// What an agent needs to know about the ego vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgoView {
    pub bbox: OrientedBox<f64>,
    pub speed: f64,
}

/// Read-only snapshot the agents react to.
#[derive(Debug, Clone, Copy)]
pub struct World<'a> {
    pub graph: &'a LaneGraph,
    pub agents: &'a [AgentState],
    pub obstacles: &'a [ObstacleSpec],
    pub pedestrians: &'a [PedestrianState],
}

/// Lead as `(lead speed along the lane, bumper-to-bumper gap)`.
pub type Lead = (f64, f64);

const MIN_GAP: f64 = 0.05;
const PEDESTRIAN_MARGIN: f64 = 0.5;

fn consider(best: &mut Option<Lead>, candidate: Lead) {
    if best.map_or(true, |(_, g)| candidate.1 < g) {
        *best = Some(candidate);
    }
}

fn lead_from_box(lane: &LaneSegment, front_s: f64, b: &OrientedBox<f64>, v: f64) -> Option<Lead> {
    let half = 0.5 * lane.width;
    let e = lane.centerline.box_extent(b);
    if !e.overlaps_band(-half, half) || e.s_max <= front_s {
        return None;
    }
    Some((v, (e.s_min - front_s).max(MIN_GAP)))
}

/// Whether the ego counts as being in `lane` for an agent with `policy`.
pub fn ego_in_lane(policy: AgentPolicy, lane: &LaneSegment, ego: &OrientedBox<f64>) -> bool {
    let half = 0.5 * lane.width;
    let center = lane.project(ego.center.position());
    if center.s <= 0.0 || center.s >= lane.length() {
        return false;
    }
    match policy {
        AgentPolicy::Conservative => lane.centerline.box_extent(ego).overlaps_band(-half, half),
        AgentPolicy::Assertive => center.d.abs() < 0.25 * lane.width,
    }
}

/// Nearest actor ahead of `agent` in its lane corridor.
pub fn select_lead(agent: &AgentState, world: &World<'_>, ego: &EgoView) -> Option<Lead> {
    let lane = world.graph.lane(&agent.lane)?;
    let front = agent.s + 0.5 * agent.length;
    let heading = lane.centerline.heading_at(agent.s);
    let along = |v: Vec2<f64>| v.dot(Vec2::from_angle(heading));
    let mut best = None;

    for other in world.agents.iter().filter(|o| o.active && o.id != agent.id) {
        if other.lane == agent.lane {
            if other.s > agent.s {
                let gap = other.s - 0.5 * other.length - front;
                consider(&mut best, (other.speed, gap.max(MIN_GAP)));
            }
        } else if let Some(l) = lead_from_box(lane, front, &other.bbox(world.graph), along(other.velocity(world.graph))) {
            // agents on successor lanes or crossing the corridor
            if lane.project(other.bbox(world.graph).center.position()).s > agent.s {
                consider(&mut best, l);
            }
        }
    }
    if ego_in_lane(agent.policy, lane, &ego.bbox)
        && lane.project(ego.bbox.center.position()).s > agent.s
    {
        let v = ego.speed * ego.bbox.center.direction().dot(Vec2::from_angle(heading));
        if let Some(l) = lead_from_box(lane, front, &ego.bbox, v) {
            consider(&mut best, l);
        }
    }
    for o in world.obstacles {
        if let Some(l) = lead_from_box(lane, front, &o.bbox, 0.0) {
            consider(&mut best, l);
        }
    }
    for p in world.pedestrians.iter().filter(|p| p.phase == PedestrianPhase::Crossing) {
        let f = lane.project(p.position());
        if f.d.abs() <= 0.5 * lane.width + PEDESTRIAN_MARGIN && f.s > front && f.s < lane.length() {
            let gap = f.s - 0.5 * PEDESTRIAN_SIZE - front;
            consider(&mut best, (along(p.velocity()).max(0.0), gap.max(MIN_GAP)));
        }
    }
    best
}

/// One explicit-Euler step of an IDM lane keeper. Agents never change lanes.
pub fn step_vehicle_agent(agent: &AgentState, world: &World<'_>, ego: &EgoView, dt: f64) -> AgentState {
    let mut next = agent.clone();
    if !agent.active {
        return next;
    }
    let lead = select_lead(agent, world, ego);
    let accel = idm_acceleration(agent.speed, lead, &agent.params).unwrap_or(EMERGENCY_DECEL);
    next.speed = (agent.speed + accel * dt).max(0.0);
    next.s = agent.s + next.speed * dt;
    loop {
        let lane = world.graph.lane(&next.lane).expect("agent lane exists");
        if next.s <= lane.length() {
            break;
        }
        match lane.successors.first() {
            Some(succ) => {
                next.s -= lane.length();
                next.lane = succ.clone();
            }
            None => {
                next.s = lane.length();
                next.active = false;
                break;
            }
        }
    }
    next
}

/// Straight path helper used by scenario builders.
pub fn straight_path(from: Vec2<f64>, to: Vec2<f64>) -> Polyline<f64> {
    Polyline::new(vec![from, to]).expect("distinct endpoints")
}

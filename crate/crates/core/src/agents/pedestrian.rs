use serde::{Deserialize, Serialize};

use crate::geometry::{OrientedBox, Polyline, Pose2D, Vec2};
use crate::map::{LaneGraph, LaneId};

/// Footprint edge length of a pedestrian box, m.
pub const PEDESTRIAN_SIZE: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PedestrianPhase {
    Waiting,
    Crossing,
    Done,
}

/// Jaywalker that starts walking once the ego gets close. Never yields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PedestrianState {
    pub id: u32,
    pub path: Polyline<f64>,
    /// Distance walked along `path`.
    pub walked: f64,
    pub walk_speed: f64,
    pub phase: PedestrianPhase,
    pub trigger_distance: f64,
    /// Lane whose arclength measures the ego's approach.
    pub trigger_lane: LaneId,
    /// Arclength on `trigger_lane` where the path enters the lane.
    pub entry_s: f64,
}

impl PedestrianState {
    pub fn position(&self) -> Vec2<f64> {
        self.path.sample(self.walked).0
    }

    pub fn velocity(&self) -> Vec2<f64> {
        match self.phase {
            PedestrianPhase::Crossing => self.path.sample(self.walked).1 * self.walk_speed,
            _ => Vec2::new(0.0, 0.0),
        }
    }

    pub fn bbox(&self) -> OrientedBox<f64> {
        let (p, t) = self.path.sample(self.walked);
        OrientedBox::new(Pose2D::new(p.x, p.y, t.angle()), PEDESTRIAN_SIZE, PEDESTRIAN_SIZE)
    }

    /// Along-lane distance from the ego front bumper to the crossing entry;
    /// negative once the ego has passed it.
    pub fn ego_distance(&self, ego: &OrientedBox<f64>, g: &LaneGraph) -> Option<f64> {
        let lane = g.lane(&self.trigger_lane)?;
        let ego_front = lane.project(ego.center.position()).s + 0.5 * ego.length;
        Some(self.entry_s - ego_front)
    }
}

/// Advances the waiting -> crossing -> done phase machine by `dt`.
pub fn step_pedestrian(
    ped: &PedestrianState,
    ego: &OrientedBox<f64>,
    g: &LaneGraph,
    dt: f64,
) -> PedestrianState {
    let mut next = ped.clone();
    if next.phase == PedestrianPhase::Waiting {
        if let Some(dist) = ped.ego_distance(ego, g) {
            if (0.0..=ped.trigger_distance).contains(&dist) {
                next.phase = PedestrianPhase::Crossing;
            }
        }
    }
    if next.phase == PedestrianPhase::Crossing {
        next.walked = (next.walked + next.walk_speed * dt).min(next.path.length());
        if next.walked >= next.path.length() {
            next.phase = PedestrianPhase::Done;
        }
    }
    next
}

use serde::{Deserialize, Serialize};

use crate::geometry::{boxes_collide, OrientedBox, Vec2};
use crate::map::LaneGraph;

use super::{Snapshot, EGO_STOPPED};

/// Lateral speed toward another lane's centerline that counts as cutting in, m/s.
const INTRUSION_SPEED: f64 = 0.2;
/// Offset from that centerline beyond which the ego is still entering it, m.
const INTRUSION_OFFSET: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum ActorRef {
    Agent(u32),
    Pedestrian(u32),
    /// Index into the scenario's obstacle list.
    Obstacle(usize),
}

/// Another actor at one tick, as seen by the contact check.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactActor<'a> {
    pub actor: ActorRef,
    pub bbox: OrientedBox<f64>,
    pub velocity: Vec2<f64>,
    pub lane: Option<&'a crate::map::LaneId>,
}

/// Every actor in a snapshot, obstacles included.
pub fn actors_at<'a>(snap: &'a Snapshot, obstacles: &'a [crate::scenario::ObstacleSpec]) -> Vec<ContactActor<'a>> {
    let mut out = Vec::with_capacity(snap.agents.len() + snap.pedestrians.len() + obstacles.len());
    for a in snap.agents.iter().filter(|a| a.active) {
        out.push(ContactActor { actor: ActorRef::Agent(a.id), bbox: a.bbox, velocity: a.velocity, lane: Some(&a.lane) });
    }
    for p in &snap.pedestrians {
        out.push(ContactActor { actor: ActorRef::Pedestrian(p.id), bbox: p.bbox, velocity: p.velocity, lane: None });
    }
    for (i, o) in obstacles.iter().enumerate() {
        out.push(ContactActor { actor: ActorRef::Obstacle(i), bbox: o.bbox, velocity: Vec2::new(0.0, 0.0), lane: None });
    }
    out
}

/// Actors touching the ego in `snap`.
pub fn ego_contacts<'a>(snap: &'a Snapshot, obstacles: &'a [crate::scenario::ObstacleSpec]) -> Vec<ContactActor<'a>> {
    let ego = snap.ego.bbox;
    actors_at(snap, obstacles).into_iter().filter(|a| boxes_collide(&ego, &a.bbox)).collect()
}

/// Whether the ego is to blame for a contact starting at `cur`; `prev`
/// gives the ego's motion into it.
///
/// Static objects and pedestrians: at fault whenever the ego moves.
/// Vehicles: a stopped ego is never at fault; otherwise front-only
/// contact, closing in with both halves, or cutting into the other's
/// lane puts the blame on the ego.
pub fn ego_at_fault(prev: &Snapshot, cur: &Snapshot, other: &ContactActor<'_>, graph: &LaneGraph, dt: f64) -> bool {
    let ego = cur.ego.bbox;
    let moving = cur.ego.speed >= EGO_STOPPED;
    if !moving {
        return false;
    }
    if !matches!(other.actor, ActorRef::Agent(_)) {
        return true;
    }
    let ego_vel = (cur.ego.bbox.center.position() - prev.ego.bbox.center.position()) * (1.0 / dt);
    if let Some(lane) = other.lane.and_then(|id| graph.lane(id)) {
        let f = lane.project(ego.center.position());
        let (_, tangent) = lane.centerline.sample(f.s);
        let lateral = ego_vel.dot(tangent.perp());
        // moving toward the centerline from either side
        if f.d.abs() > INTRUSION_OFFSET && -f.d.signum() * lateral > INTRUSION_SPEED {
            return true;
        }
    }
    let front = boxes_collide(&ego.half(true), &other.bbox);
    let rear = boxes_collide(&ego.half(false), &other.bbox);
    match (front, rear) {
        (true, false) => true,
        (false, _) => false,
        (true, true) => {
            let rel = ego_vel - other.velocity;
            rel.dot(other.bbox.center.position() - ego.center.position()) > 0.0
        }
    }

}

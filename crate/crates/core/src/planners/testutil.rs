use crate::geometry::{OrientedBox, Pose2D, Vec2};
use crate::map::{shortest_route, LaneGraph, LaneId, Route};
use crate::scenario::{build_base_map, build_map, MapKind, MapParams, ObstacleKind, ObstacleSpec, CAR_LENGTH, CAR_WIDTH, EGO_LENGTH, EGO_WIDTH};

use super::{AgentObs, EgoObs, Observation, PedestrianObs};

pub(crate) fn straight_world(lanes: usize, len: f64) -> (LaneGraph, Route) {
    let g = build_base_map(MapKind::StraightMultilane, lanes, 3.5, len).unwrap();
    let r = route_to(&g, "L0", "L0", len);
    (g, r)
}

pub(crate) fn two_way_world(len: f64) -> (LaneGraph, Route) {
    let g = build_map(&MapParams::new(MapKind::TwoWay, 1, 3.5, len)).unwrap();
    let r = route_to(&g, "L0", "L0", len);
    (g, r)
}

pub(crate) fn route_to(g: &LaneGraph, from: &str, to: &str, len: f64) -> Route {
    let goal_lane = g.lane(&to.into()).unwrap();
    let (p, t) = goal_lane.centerline.sample(len - 20.0);
    shortest_route(g, &LaneId::from(from), &LaneId::from(to), Pose2D::new(p.x, p.y, t.angle())).unwrap()
}

pub(crate) fn ego_obs(x: f64, y: f64, heading: f64, speed: f64) -> EgoObs {
    EgoObs { bbox: OrientedBox::new(Pose2D::new(x, y, heading), EGO_LENGTH, EGO_WIDTH), speed, accel: 0.0 }
}

pub(crate) fn obs<'a>(g: &'a LaneGraph, r: &'a Route, ego: EgoObs) -> Observation<'a> {
    Observation { ego, agents: vec![], pedestrians: vec![], obstacles: vec![], graph: g, route: r, time: 0.0 }
}

pub(crate) fn car(id: u32, lane: &str, x: f64, y: f64, speed: f64) -> AgentObs {
    let heading = if speed < 0.0 { std::f64::consts::PI } else { 0.0 };
    AgentObs {
        id,
        bbox: OrientedBox::new(Pose2D::new(x, y, heading), CAR_LENGTH, CAR_WIDTH),
        speed: speed.abs(),
        lane: lane.into(),
        velocity: Vec2::new(speed, 0.0),
    }
}

pub(crate) fn obstacle(kind: ObstacleKind, lane: &str, x: f64, y: f64, length: f64, width: f64) -> ObstacleSpec {
    ObstacleSpec { kind, bbox: OrientedBox::new(Pose2D::new(x, y, 0.0), length, width), lane: lane.into() }
}

pub(crate) fn pedestrian(id: u32, x: f64, y: f64, vx: f64, vy: f64) -> PedestrianObs {
    PedestrianObs { id, position: Vec2::new(x, y), velocity: Vec2::new(vx, vy) }
}

use thiserror::Error;

use crate::agents::{straight_path, PedestrianPhase, PedestrianState};
use crate::geometry::{FrenetPoint, OrientedBox, Pose2D};
use crate::map::{shortest_route, LaneGraph, LaneId, LaneSegment, Route, RouteError};
use crate::scalar::normalize_angle;

use super::{AgentSet, EgoStart, ObstacleKind, ObstacleSpec, ScenarioSpec, ScenarioType, CAR_LENGTH, CAR_WIDTH, EGO_LENGTH};

/// Braking level assumed by the jaywalker reaction precondition, m/s^2.
pub const JAYWALK_BRAKING: f64 = 4.0;
/// Minimum distance from the ego front bumper to any placed hazard, m.
pub const MIN_HAZARD_AHEAD: f64 = 30.0;
/// Largest parked-vehicle encroachment for the nudge variant, as a lane fraction.
pub const MAX_NUDGE_ENCROACHMENT: f64 = 0.4;
pub const CONE_SIZE: f64 = 0.5;
pub const BUS_LENGTH: f64 = 12.0;
pub const BUS_WIDTH: f64 = 2.6;
/// Gap between the stopped bus and the ego lane edge, m.
const BUS_CURB_GAP: f64 = 0.1;
/// How far outside the lane edge the jaywalker waits, m.
pub const PEDESTRIAN_START_OUTSIDE: f64 = 1.5;
const TRUCK_LENGTH: f64 = 7.0;
const TRUCK_WIDTH: f64 = 2.5;
const CONE_EDGE_MARGIN: f64 = 0.3;
const GOAL_BEFORE_END: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParkedVariant {
    /// Parked on the right, reaching `encroachment` lane widths into the lane.
    Nudge { encroachment: f64 },
    /// Double-parked across the lane; passing needs the oncoming lane.
    Overtake,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccidentPattern {
    RearEnd,
    Crossing,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlacementError {
    #[error("hazard starts {ahead:.1} m ahead of the ego, at least {MIN_HAZARD_AHEAD} m required")]
    TooClose { ahead: f64 },
    #[error("placement runs past the end of lane {0}")]
    PastLaneEnd(LaneId),
    #[error("non-positive placement dimension")]
    BadDimension,
    #[error("nudge encroachment {0} outside (0, {MAX_NUDGE_ENCROACHMENT}]")]
    Encroachment(f64),
    #[error("map has no oncoming lane to overtake through")]
    NoOncomingLane,
    #[error("map has no adjacent lane to pass the accident in")]
    NoPassingLane,
    #[error("trigger distance {trigger:.1} m does not exceed the stopping distance {stopping:.1} m")]
    TriggerTooShort { trigger: f64, stopping: f64 },
    #[error("{requested} lane changes requested but only {available} are possible")]
    InfeasibleLaneChanges { requested: usize, available: usize },
    #[error(transparent)]
    Route(#[from] RouteError),
}

impl ScenarioSpec {
    /// Empty scenario with the ego on `lane` at arclength `s`, routed to the
    /// end of that lane.
    pub fn base(
        name: impl Into<String>,
        kind: ScenarioType,
        seed: u64,
        graph: LaneGraph,
        lane: &LaneId,
        s: f64,
        speed: f64,
        duration: f64,
    ) -> Result<Self, PlacementError> {
        let seg = graph.lane(lane).ok_or_else(|| RouteError::UnknownLane(lane.clone()))?;
        let pose = seg
            .centerline
            .to_cartesian(FrenetPoint::new(s, 0.0))
            .map_err(|_| PlacementError::PastLaneEnd(lane.clone()))?;
        let goal = goal_pose(seg);
        let route = shortest_route(&graph, lane, lane, goal)?;
        Ok(Self {
            name: name.into(),
            kind,
            seed,
            graph,
            ego: EgoStart { pose, speed },
            agents: AgentSet::default(),
            obstacles: vec![],
            route,
            duration,
        })
    }
}

fn goal_pose(lane: &LaneSegment) -> Pose2D<f64> {
    let s = (lane.length() - GOAL_BEFORE_END).max(0.5 * lane.length());
    lane.centerline
        .to_cartesian(FrenetPoint::new(s, 0.0))
        .expect("inside lane")
}

fn ego_lane(spec: &ScenarioSpec) -> (LaneId, LaneSegment) {
    let id = spec.ego_lane().clone();
    let seg = spec.graph.lane(&id).expect("validated route").clone();
    (id, seg)
}

fn ego_front(spec: &ScenarioSpec) -> f64 {
    spec.ego_s() + 0.5 * EGO_LENGTH
}

fn check_ahead(spec: &ScenarioSpec, start: f64) -> Result<(), PlacementError> {
    let ahead = start - ego_front(spec);
    if ahead < MIN_HAZARD_AHEAD {
        return Err(PlacementError::TooClose { ahead });
    }
    Ok(())
}

/// Box on `lane` centered at `(s, d)`, rotated `yaw` relative to the lane.
fn lane_box(lane: &LaneSegment, s: f64, d: f64, yaw: f64, length: f64, width: f64) -> Result<OrientedBox<f64>, PlacementError> {
    let p = lane
        .centerline
        .to_cartesian(FrenetPoint::new(s, d))
        .map_err(|_| PlacementError::PastLaneEnd(lane.id.clone()))?;
    Ok(OrientedBox::new(
        Pose2D::new(p.x, p.y, normalize_angle(p.heading + yaw)),
        length,
        width,
    ))
}

fn in_lane(lane: &LaneSegment, s_end: f64) -> Result<(), PlacementError> {
    if s_end > lane.length() {
        Err(PlacementError::PastLaneEnd(lane.id.clone()))
    } else {
        Ok(())
    }
}

/// Cones closing the ego lane over `[start_s, start_s + zone_length]`: an
/// entry taper across the lane, a row along the left edge, an exit taper.
pub fn place_construction_zone(
    spec: &ScenarioSpec,
    start_s: f64,
    zone_length: f64,
) -> Result<ScenarioSpec, PlacementError> {
    if !(zone_length > 0.0) {
        return Err(PlacementError::BadDimension);
    }
    check_ahead(spec, start_s - 0.5 * CONE_SIZE)?;
    let (id, lane) = ego_lane(spec);
    in_lane(&lane, start_s + zone_length + CONE_SIZE)?;

    let right = -0.5 * lane.width + CONE_EDGE_MARGIN;
    let left = 0.5 * lane.width - CONE_EDGE_MARGIN;
    let taper = (zone_length / 3.0).min(5.0);
    // lateral spacing below the ego width keeps the taper closed
    let across = ((left - right) / 0.9).ceil().max(1.0) as usize;
    let mut spots = Vec::new();
    for k in 0..=across {
        let f = k as f64 / across as f64;
        spots.push((start_s + f * taper, right + f * (left - right)));
    }
    let row_end = start_s + zone_length - taper;
    let mut s = start_s + taper + 3.0;
    while s < row_end - 1.0 {
        spots.push((s, left));
        s += 3.0;
    }
    for k in 0..=across {
        let f = k as f64 / across as f64;
        spots.push((row_end + f * taper, left - f * (left - right)));
    }

    let mut out = spec.clone();
    for (s, d) in spots {
        out.obstacles.push(ObstacleSpec {
            kind: ObstacleKind::Cone,
            bbox: lane_box(&lane, s, d, 0.0, CONE_SIZE, CONE_SIZE)?,
            lane: id.clone(),
        });
    }
    Ok(out)
}

fn has_oncoming(spec: &ScenarioSpec, lane: &LaneSegment, s: f64) -> bool {
    let at = lane.centerline.sample(s).0;
    spec.graph.lanes().any(|o| {
        o.id != lane.id && o.project(at).d.abs() <= 1.5 * lane.width && spec.graph.is_opposing(&lane.id, &o.id, at)
    })
}

/// Parked vehicle centered at `at_s` on the ego lane.
pub fn place_parked_vehicle(
    spec: &ScenarioSpec,
    variant: ParkedVariant,
    at_s: f64,
) -> Result<ScenarioSpec, PlacementError> {
    let (id, lane) = ego_lane(spec);
    let w = lane.width;
    let (kind, len, wid, d) = match variant {
        ParkedVariant::Nudge { encroachment } => {
            if !(encroachment > 0.0 && encroachment <= MAX_NUDGE_ENCROACHMENT) {
                return Err(PlacementError::Encroachment(encroachment));
            }
            (ObstacleKind::ParkedVehicle, CAR_LENGTH, CAR_WIDTH, -0.5 * w + encroachment * w - 0.5 * CAR_WIDTH)
        }
        ParkedVariant::Overtake => {
            if !has_oncoming(spec, &lane, at_s.min(lane.length())) {
                return Err(PlacementError::NoOncomingLane);
            }
            // left side reaches 0.2 m past where an in-lane ego's right side could be
            let d = 0.5 * w - 1.0 + 0.2 - 0.5 * TRUCK_WIDTH;
            (ObstacleKind::ParkedVehicle, TRUCK_LENGTH, TRUCK_WIDTH, d)
        }
    };
    check_ahead(spec, at_s - 0.5 * len)?;
    in_lane(&lane, at_s + 0.5 * len)?;
    let mut out = spec.clone();
    out.obstacles.push(ObstacleSpec { kind, bbox: lane_box(&lane, at_s, d, 0.0, len, wid)?, lane: id });
    Ok(out)
}

/// Two crashed cars with intersecting boxes, the first centered at `at_s`.
pub fn place_accident_site(
    spec: &ScenarioSpec,
    at_s: f64,
    pattern: AccidentPattern,
) -> Result<ScenarioSpec, PlacementError> {
    let (id, lane) = ego_lane(spec);
    if lane.left_neighbor.is_none() && !has_oncoming(spec, &lane, at_s.min(lane.length())) {
        return Err(PlacementError::NoPassingLane);
    }
    check_ahead(spec, at_s - 0.5 * CAR_LENGTH)?;
    const OVERLAP: f64 = 0.5;
    let first = lane_box(&lane, at_s, 0.0, 0.0, CAR_LENGTH, CAR_WIDTH)?;
    let second = match pattern {
        AccidentPattern::RearEnd => {
            in_lane(&lane, at_s + 1.5 * CAR_LENGTH)?;
            lane_box(&lane, at_s + CAR_LENGTH - OVERLAP, 0.0, 0.0, CAR_LENGTH, CAR_WIDTH)?
        }
        AccidentPattern::Crossing => {
            in_lane(&lane, at_s + CAR_LENGTH)?;
            // came from the right and hit the first car's right flank
            let d = -(0.5 * CAR_WIDTH - OVERLAP + 0.5 * CAR_LENGTH);
            lane_box(&lane, at_s + 0.5, d, std::f64::consts::FRAC_PI_2, CAR_LENGTH, CAR_WIDTH)?
        }
    };
    let mut out = spec.clone();
    for bbox in [first, second] {
        out.obstacles.push(ObstacleSpec { kind: ObstacleKind::CrashedVehicle, bbox, lane: id.clone() });
    }
    Ok(out)
}

/// Stopped bus on the right shoulder centered at `bus_stop_s`, and a
/// pedestrian who steps out in front of it once the ego is within
/// `trigger_distance` of the crossing.
pub fn place_jaywalker(
    spec: &ScenarioSpec,
    bus_stop_s: f64,
    trigger_distance: f64,
    walk_speed: f64,
) -> Result<ScenarioSpec, PlacementError> {
    if !(walk_speed > 0.0) || !(trigger_distance > 0.0) {
        return Err(PlacementError::BadDimension);
    }
    let stopping = spec.ego.speed.powi(2) / (2.0 * JAYWALK_BRAKING);
    if trigger_distance <= stopping {
        return Err(PlacementError::TriggerTooShort { trigger: trigger_distance, stopping });
    }
    let (id, lane) = ego_lane(spec);
    let w = lane.width;
    check_ahead(spec, bus_stop_s - 0.5 * BUS_LENGTH)?;
    let entry_s = bus_stop_s + 0.5 * BUS_LENGTH + 1.0;
    if entry_s - ego_front(spec) < trigger_distance {
        // would already be crossing at t = 0
        return Err(PlacementError::TooClose { ahead: entry_s - ego_front(spec) });
    }
    in_lane(&lane, entry_s + 1.0)?;

    let bus = lane_box(&lane, bus_stop_s, -0.5 * w - 0.5 * BUS_WIDTH - BUS_CURB_GAP, 0.0, BUS_LENGTH, BUS_WIDTH)?;
    // walk across every lane on the left, ending 1 m past the last one
    let mut far = 0.5 * w;
    for o in spec.graph.lanes() {
        let f = o.project(lane.centerline.sample(entry_s).0);
        let rel = lane.project(o.centerline.sample(f.s).0).d;
        far = far.max(rel + 0.5 * o.width);
    }
    let start = lane.centerline.to_cartesian(FrenetPoint::new(entry_s, -0.5 * w - PEDESTRIAN_START_OUTSIDE))
        .map_err(|_| PlacementError::PastLaneEnd(id.clone()))?;
    let end = lane.centerline.to_cartesian(FrenetPoint::new(entry_s, far + 1.0))
        .map_err(|_| PlacementError::PastLaneEnd(id.clone()))?;

    let mut out = spec.clone();
    out.obstacles.push(ObstacleSpec { kind: ObstacleKind::StoppedBus, bbox: bus, lane: id.clone() });
    out.agents.pedestrians.push(PedestrianState {
        id: out.next_agent_id(),
        path: straight_path(start.position(), end.position()),
        walked: 0.0,
        walk_speed,
        phase: PedestrianPhase::Waiting,
        trigger_distance,
        trigger_lane: id,
        entry_s,
    });
    Ok(out)
}

/// Moves the goal `n_changes` lanes over (left first, else right) so the
/// route needs exactly that many lane changes.
pub fn augment_goal_for_lane_changes(spec: &ScenarioSpec, n_changes: usize) -> Result<ScenarioSpec, PlacementError> {
    let (start, _) = ego_lane(spec);
    let chain = |left: bool| {
        let mut ids = vec![start.clone()];
        while let Some(next) = spec.graph.lane(ids.last().expect("non-empty")).and_then(|l| {
            if left { l.left_neighbor.clone() } else { l.right_neighbor.clone() }
        }) {
            ids.push(next);
        }
        ids
    };
    let (left, right) = (chain(true), chain(false));
    let side = if left.len() > n_changes {
        left
    } else if right.len() > n_changes {
        right
    } else {
        return Err(PlacementError::InfeasibleLaneChanges {
            requested: n_changes,
            available: left.len().max(right.len()) - 1,
        });
    };
    let target = spec.graph.lane(&side[n_changes]).expect("neighbor exists");
    let route: Route = shortest_route(&spec.graph, &start, &target.id, goal_pose(target))?;
    let mut out = spec.clone();
    out.route = route;
    Ok(out)
}

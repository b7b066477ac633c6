use crate::agents::straight_path;
use crate::geometry::FrenetPoint;
use crate::map::LaneId;

use super::maps::{build_map, MapKind, MapParams};
use super::placement::{place_jaywalker, PlacementError, BUS_LENGTH};
use super::{ScenarioSpec, ScenarioType, EGO_LENGTH, EGO_WIDTH};

const LANE_WIDTH: f64 = 3.5;
const SHOULDER: f64 = 3.0;
const EGO_S: f64 = 30.0;
/// Free driving before the crossing starts, s.
const LEAD_IN: f64 = 2.0;
pub const SCRIPTED_DURATION: f64 = 12.0;

/// Single-lane crossing conflict without an occluding bus. The pedestrian
/// starts walking when the ego is `lead_time` seconds (at `speed`) from the
/// crossing line and reaches the ego's path right as the ego would arrive,
/// so the conflict first becomes predictable `lead_time` seconds ahead.
pub fn scripted_crossing(speed: f64, walk_speed: f64, lead_time: f64) -> Result<ScenarioSpec, PlacementError> {
    if !(speed > 0.0) || !(walk_speed > 0.0) || !(lead_time > 0.0) {
        return Err(PlacementError::BadDimension);
    }
    // distance from the lane edge to the ego's right side
    let to_path = 0.5 * (LANE_WIDTH - EGO_WIDTH);
    let outside = lead_time * walk_speed - to_path;
    if !(0.0..=SHOULDER).contains(&outside) {
        return Err(PlacementError::BadDimension);
    }
    let params = MapParams {
        right_shoulder: SHOULDER,
        speed_limit: speed,
        ..MapParams::new(MapKind::StraightMultilane, 1, LANE_WIDTH, 300.0)
    };
    let graph = build_map(&params).map_err(|_| PlacementError::BadDimension)?;
    let lane = LaneId::from("L0");
    let base = ScenarioSpec::base("scripted_crossing", ScenarioType::Jaywalker, 0, graph, &lane, EGO_S, speed, SCRIPTED_DURATION)?;
    let trigger = lead_time * speed;
    let entry_s = EGO_S + 0.5 * EGO_LENGTH + trigger + LEAD_IN * speed;
    let mut spec = place_jaywalker(&base, entry_s - 0.5 * BUS_LENGTH - 1.0, trigger, walk_speed)?;
    spec.obstacles.clear();
    let l = spec.graph.lane(&lane).expect("ego lane").centerline.clone();
    let ped = &mut spec.agents.pedestrians[0];
    let end = *ped.path.points().last().expect("non-empty path");
    let start = l
        .to_cartesian(FrenetPoint::new(ped.entry_s, -0.5 * LANE_WIDTH - outside))
        .map_err(|_| PlacementError::PastLaneEnd(lane.clone()))?;
    ped.path = straight_path(start.position(), end);
    Ok(spec)
}

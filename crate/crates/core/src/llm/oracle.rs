use super::{BehaviorSelector, LlmError, SelectorResponse};
use crate::map::EdgeKind;
use crate::planners::{BehaviorLabel, BehaviorOption, Observation, ReferencePath, Tracks};
use crate::scenario::{ScenarioType, EGO_LENGTH, EGO_WIDTH};

/// Actors closer than this in time to the pass corridor block an overtake, s.
pub const ORACLE_HEADWAY: f64 = 8.0;
/// Lateral margin added around the ego footprint at the pass offset, m.
const PASS_BAND_MARGIN: f64 = 0.3;
/// Minimum free space in the target lane for a merge, m.
const MERGE_GAP: f64 = 15.0;
const MERGE_CLEARANCE: f64 = 5.0;
/// Closing speeds below this are treated as not approaching, m/s.
const MIN_CLOSING: f64 = 0.5;

fn pick(options: &[BehaviorOption], label: BehaviorLabel, why: &str) -> Option<SelectorResponse> {
    options
        .iter()
        .any(|o| o.label == label)
        .then(|| SelectorResponse { chosen_label: label, rationale: why.to_owned() })
}

/// True when some actor is in, or within the headway of, the corridor
/// the ego would use to pass at the overtake offset.
fn pass_corridor_busy(obs: &Observation<'_>, opt: &BehaviorOption) -> bool {
    let path = ReferencePath::along_lane(obs.graph, &opt.centerline, Some(obs.route));
    let f = path.project(obs.ego.bbox.center.position());
    let (rear, front) = (f.s - 0.5 * EGO_LENGTH, f.s + 0.5 * EGO_LENGTH);
    let hw = 0.5 * EGO_WIDTH + PASS_BAND_MARGIN;
    let (lo, hi) = (opt.lateral_offset.min(f.d) - hw, opt.lateral_offset.max(f.d) + hw);
    let v = obs.ego.speed;
    Tracks::new(&path, obs).items.iter().filter(|t| !t.is_static && t.overlaps_band(lo, hi)).any(|t| {
        if t.s_max >= rear && t.s_min <= front {
            return true;
        }
        if t.s_min > front {
            // ahead: only actors coming toward the ego matter
            let closing = v - t.v_s;
            t.v_s < -MIN_CLOSING && (t.s_min - front) / closing.max(MIN_CLOSING) < ORACLE_HEADWAY
        } else {
            let closing = t.v_s - v;
            closing > MIN_CLOSING && (rear - t.s_max) / closing < ORACLE_HEADWAY
        }
    })
}

fn merge_gap_ok(obs: &Observation<'_>, target: &BehaviorOption) -> bool {
    let path = ReferencePath::along_lane(obs.graph, &target.centerline, Some(obs.route));
    let f = path.project(obs.ego.bbox.center.position());
    let (rear, front) = (f.s - 0.5 * EGO_LENGTH, f.s + 0.5 * EGO_LENGTH);
    let half = 0.5 * path.lane_width;
    let tracks = Tracks::new(&path, obs);
    let in_lane = tracks.items.iter().filter(|t| t.overlaps_band(-half, half) && !t.is_pedestrian);
    let mut ahead = f64::INFINITY;
    let mut behind = f64::NEG_INFINITY;
    for t in in_lane {
        if t.s_max < f.s {
            behind = behind.max(t.s_max);
        } else if t.s_min > f.s {
            ahead = ahead.min(t.s_min);
        } else {
            return false;
        }
    }
    ahead - front >= MERGE_CLEARANCE && rear - behind >= MERGE_CLEARANCE && ahead - behind >= MERGE_GAP
}

/// Rule-based stand-in for an LLM behavior selector.
pub fn scripted_oracle(kind: ScenarioType, obs: &Observation<'_>, options: &[BehaviorOption]) -> SelectorResponse {
    if let Some(ov) = options.iter().find(|o| o.label == BehaviorLabel::OvertakeObstacle) {
        let alongside = ov.blocker.as_ref().map_or(false, |b| b.distance < 0.0);
        if alongside {
            if let Some(r) = pick(options, BehaviorLabel::OvertakeObstacle, "already passing the obstacle") {
                return r;
            }
        }
        if !pass_corridor_busy(obs, ov) {
            return SelectorResponse {
                chosen_label: BehaviorLabel::OvertakeObstacle,
                rationale: "lane blocked and the passing corridor is clear".to_owned(),
            };
        }
        if let Some(r) = pick(options, BehaviorLabel::StopAndWait, "lane blocked and traffic in the passing corridor") {
            return r;
        }
    }
    if kind.is_lane_change() {
        let lane = obs.current_lane();
        let wanted = match obs.route.next_change_after(&lane.id) {
            Some(EdgeKind::Left) => Some(BehaviorLabel::MergeLeft),
            Some(EdgeKind::Right) => Some(BehaviorLabel::MergeRight),
            _ => None,
        };
        if let Some(target) = wanted.and_then(|w| options.iter().find(|o| o.label == w)) {
            if merge_gap_ok(obs, target) {
                return SelectorResponse {
                    chosen_label: target.label,
                    rationale: "route needs a lane change and the target gap is large enough".to_owned(),
                };
            }
        }
    }
    pick(options, BehaviorLabel::FollowLane, "nothing calls for a maneuver").unwrap_or_else(|| SelectorResponse {
        chosen_label: options[0].label,
        rationale: "first offered option".to_owned(),
    })
}

/// Deterministic selector applying `scripted_oracle` rules.
#[derive(Debug, Clone)]
pub struct ScriptedOracle {
    pub kind: ScenarioType,
}

impl ScriptedOracle {
    pub fn new(kind: ScenarioType) -> Self {
        Self { kind }
    }
}

impl BehaviorSelector for ScriptedOracle {
    fn name(&self) -> &str {
        "scripted_oracle"
    }

    fn select(&mut self, obs: &Observation<'_>, options: &[BehaviorOption]) -> Result<SelectorResponse, LlmError> {
        Ok(scripted_oracle(self.kind, obs, options))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planners::enumerate_behaviors;
    use crate::planners::testutil::*;
    use crate::scenario::ObstacleKind;

    fn blocked_two_way<'a>(g: &'a crate::map::LaneGraph, r: &'a crate::map::Route) -> Observation<'a> {
        let mut o = obs(g, r, ego_obs(50.0, 0.0, 0.0, 10.0));
        o.obstacles.push(obstacle(ObstacleKind::ParkedVehicle, "L0", 90.0, 0.0, 7.0, 2.5));
        o
    }

    #[test]
    fn empty_oncoming_lane_overtakes() {
        let (g, r) = two_way_world(400.0);
        let o = blocked_two_way(&g, &r);
        let opts = enumerate_behaviors(&o);
        assert_eq!(scripted_oracle(ScenarioType::Overtake, &o, &opts).chosen_label, BehaviorLabel::OvertakeObstacle);
    }

    #[test]
    fn oncoming_car_three_seconds_away_waits() {
        let (g, r) = two_way_world(400.0);
        let mut o = blocked_two_way(&g, &r);
        // closing at 10 + 12 m/s, 3 s away from the ego front
        o.agents.push(car(1, "O0", 52.4 + 66.0 + 2.3, 3.5, -12.0));
        let opts = enumerate_behaviors(&o);
        assert_eq!(scripted_oracle(ScenarioType::Overtake, &o, &opts).chosen_label, BehaviorLabel::StopAndWait);
    }

    #[test]
    fn receding_oncoming_lane_traffic_does_not_block() {
        let (g, r) = two_way_world(400.0);
        let mut o = blocked_two_way(&g, &r);
        o.agents.push(car(1, "O0", 30.0, 3.5, -12.0));
        let opts = enumerate_behaviors(&o);
        assert_eq!(scripted_oracle(ScenarioType::Overtake, &o, &opts).chosen_label, BehaviorLabel::OvertakeObstacle);
    }

    #[test]
    fn thirty_metre_gap_merges_toward_goal() {
        let (g, _) = straight_world(2, 400.0);
        let r = route_to(&g, "L0", "L1", 400.0);
        let mut o = obs(&g, &r, ego_obs(100.0, 0.0, 0.0, 10.0));
        // 30 m of free space between follower front and leader rear
        o.agents.push(car(1, "L1", 100.0 + 15.0 + 2.3, 3.5, 10.0));
        o.agents.push(car(2, "L1", 100.0 - 15.0 - 2.3, 3.5, 10.0));
        let opts = enumerate_behaviors(&o);
        assert_eq!(scripted_oracle(ScenarioType::LaneChangeLtd, &o, &opts).chosen_label, BehaviorLabel::MergeLeft);
        o.agents[0] = car(1, "L1", 100.0 + 6.0 + 2.3, 3.5, 10.0);
        o.agents[1] = car(2, "L1", 100.0 - 6.0 - 2.3, 3.5, 10.0);
        assert_eq!(scripted_oracle(ScenarioType::LaneChangeLtd, &o, &opts).chosen_label, BehaviorLabel::FollowLane);
    }

    #[test]
    fn clear_road_follows() {
        let (g, r) = straight_world(1, 300.0);
        let o = obs(&g, &r, ego_obs(50.0, 0.0, 0.0, 10.0));
        let opts = enumerate_behaviors(&o);
        assert_eq!(scripted_oracle(ScenarioType::Nudge, &o, &opts).chosen_label, BehaviorLabel::FollowLane);
    }
}

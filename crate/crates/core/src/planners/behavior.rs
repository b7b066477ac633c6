use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{fraction_outside_drivable_grid, OrientedBox};
use crate::map::LaneId;
use crate::scenario::{EGO_LENGTH, EGO_WIDTH};

use super::{Observation, ReferencePath, Tracks};

/// Blockers farther ahead than this are not offered for overtaking, m.
pub const BLOCKER_LOOKAHEAD: f64 = 60.0;
/// Lateral clearance kept when passing a blocker, m.
const PASS_CLEARANCE: f64 = 0.5;
/// Blockers closer than this along the lane are passed as one, m.
const CLUSTER_GAP: f64 = 8.0;
const STOPPED_SPEED: f64 = 0.1;
const COARSE_GRID: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviorLabel {
    FollowLane,
    MergeLeft,
    MergeRight,
    OvertakeObstacle,
    StopAndWait,
}

impl BehaviorLabel {
    pub const ALL: [BehaviorLabel; 5] = [
        BehaviorLabel::FollowLane,
        BehaviorLabel::MergeLeft,
        BehaviorLabel::MergeRight,
        BehaviorLabel::OvertakeObstacle,
        BehaviorLabel::StopAndWait,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BehaviorLabel::FollowLane => "follow_lane",
            BehaviorLabel::MergeLeft => "merge_left",
            BehaviorLabel::MergeRight => "merge_right",
            BehaviorLabel::OvertakeObstacle => "overtake_obstacle",
            BehaviorLabel::StopAndWait => "stop_and_wait",
        }
    }

    /// Plain-language form used in prompts.
    pub fn phrase(self) -> &'static str {
        match self {
            BehaviorLabel::FollowLane => "follow lane",
            BehaviorLabel::MergeLeft => "merge left",
            BehaviorLabel::MergeRight => "merge right",
            BehaviorLabel::OvertakeObstacle => "overtake obstacle",
            BehaviorLabel::StopAndWait => "stop and wait",
        }
    }
}

impl fmt::Display for BehaviorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Static or stopped actors blocking the current lane, merged into one span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Blocker {
    /// Kind of the nearest blocking object, e.g. "cone".
    pub kind: String,
    /// Gap from the ego front bumper to the blocker, m (negative once alongside).
    pub distance: f64,
    pub start_s: f64,
    pub far_end_s: f64,
    pub d_min: f64,
    pub d_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorOption {
    pub label: BehaviorLabel,
    pub centerline: LaneId,
    pub lateral_offset: f64,
    pub target_speed_cap: f64,
    pub blocker: Option<Blocker>,
}

fn kind_name(obs: &Observation<'_>, bbox: &OrientedBox<f64>) -> String {
    obs.obstacles
        .iter()
        .find(|o| o.bbox == *bbox)
        .map(|o| o.kind.as_str().to_owned())
        .unwrap_or_else(|| "stopped vehicle".to_owned())
}

fn find_blocker(obs: &Observation<'_>, path: &ReferencePath) -> Option<Blocker> {
    let f = path.project(obs.ego.bbox.center.position());
    let (rear, front) = (f.s - 0.5 * EGO_LENGTH, f.s + 0.5 * EGO_LENGTH);
    let half = 0.5 * path.lane_width;
    let tracks = Tracks::new(path, obs);
    let mut blocking: Vec<_> = tracks
        .items
        .iter()
        .filter(|t| !t.is_pedestrian)
        .filter(|t| t.is_static || t.velocity.norm() < STOPPED_SPEED)
        .filter(|t| t.overlaps_band(-half, half) && t.s_max > rear && t.s_min - front <= BLOCKER_LOOKAHEAD)
        .collect();
    blocking.sort_by(|a, b| a.s_min.total_cmp(&b.s_min));
    let first = *blocking.first()?;
    let mut b = Blocker {
        kind: kind_name(obs, &first.bbox),
        distance: first.s_min - front,
        start_s: first.s_min,
        far_end_s: first.s_max,
        d_min: first.d_min,
        d_max: first.d_max,
    };
    for t in &blocking[1..] {
        if t.s_min > b.far_end_s + CLUSTER_GAP {
            break;
        }
        b.far_end_s = b.far_end_s.max(t.s_max);
        b.d_min = b.d_min.min(t.d_min);
        b.d_max = b.d_max.max(t.d_max);
    }
    Some(b)
}

/// Smallest-magnitude pass offset whose ego footprint stays drivable
/// beside the blocker; left wins ties.
fn pass_offset(obs: &Observation<'_>, path: &ReferencePath, b: &Blocker) -> f64 {
    let hw = 0.5 * EGO_WIDTH;
    let left = b.d_max + hw + PASS_CLEARANCE;
    let right = b.d_min - hw - PASS_CLEARANCE;
    let mut sides = [left, right];
    if right.abs() < left.abs() {
        sides.swap(0, 1);
    }
    let mid = 0.5 * (b.start_s + b.far_end_s);
    sides
        .into_iter()
        .find(|&d| {
            let pose = path.pose(mid, d, 0.0);
            let ego = OrientedBox::new(pose, EGO_LENGTH, EGO_WIDTH);
            fraction_outside_drivable_grid(&ego, obs.graph.drivable_area(), COARSE_GRID) <= 0.05
        })
        .unwrap_or(left)
}

/// Behaviors available in the current situation.
pub fn enumerate_behaviors(obs: &Observation<'_>) -> Vec<BehaviorOption> {
    let lane = obs.current_lane();
    let option = |label, centerline: &LaneId, offset, cap, blocker| BehaviorOption {
        label,
        centerline: centerline.clone(),
        lateral_offset: offset,
        target_speed_cap: cap,
        blocker,
    };
    let mut out = vec![option(BehaviorLabel::FollowLane, &lane.id, 0.0, lane.speed_limit, None)];
    if let Some(l) = &lane.left_neighbor {
        let lim = obs.graph.lane(l).map_or(lane.speed_limit, |x| x.speed_limit);
        out.push(option(BehaviorLabel::MergeLeft, l, 0.0, lim, None));
    }
    if let Some(r) = &lane.right_neighbor {
        let lim = obs.graph.lane(r).map_or(lane.speed_limit, |x| x.speed_limit);
        out.push(option(BehaviorLabel::MergeRight, r, 0.0, lim, None));
    }
    let path = ReferencePath::along_lane(obs.graph, &lane.id, Some(obs.route));
    if let Some(b) = find_blocker(obs, &path) {
        let d = pass_offset(obs, &path, &b);
        out.push(option(BehaviorLabel::OvertakeObstacle, &lane.id, d, lane.speed_limit, Some(b)));
    }
    out.push(option(BehaviorLabel::StopAndWait, &lane.id, 0.0, 0.0, None));
    out
}

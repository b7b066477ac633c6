use serde::{Deserialize, Serialize};

use crate::agents::{idm_acceleration, IdmParams, Lead};
use crate::map::{EdgeKind, LaneId, LaneSegment};
use crate::scenario::EGO_LENGTH;

use super::idm_planner::{idm_planner_plan, plan_on_path};
use super::{Observation, PlanError, Planner, ReferencePath, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilParams {
    pub politeness: f64,
    pub a_threshold: f64,
    pub b_safe: f64,
    /// Incentive added toward the side of the next route lane change and
    /// subtracted for moves away from the route, m/s^2.
    pub route_bias: f64,
}

impl Default for MobilParams {
    fn default() -> Self {
        Self { politeness: 0.3, a_threshold: 0.1, b_safe: 4.0, route_bias: 1.0 }
    }
}

/// Lateral displacement toward a neighbor past which a started change is kept, m.
const COMMIT_OFFSET: f64 = 0.5;
/// Lateral speed toward the neighbor that marks a change in progress, m/s.
const COMMIT_LATERAL_SPEED: f64 = 0.2;
const TIE_TOLERANCE: f64 = 1e-9;

/// Something occupying a lane, in that lane's coordinates.
#[derive(Debug, Clone, Copy)]
struct Occupant {
    s_min: f64,
    s_max: f64,
    v_s: f64,
    /// Only moving vehicles count as followers whose braking matters.
    vehicle: bool,
}

fn occupants(obs: &Observation<'_>, lane: &LaneSegment) -> Vec<Occupant> {
    let half = 0.5 * lane.width;
    let mut out = Vec::new();
    let mut add = |b: &crate::geometry::OrientedBox<f64>, v: crate::geometry::Vec2<f64>, vehicle: bool| {
        let e = lane.centerline.box_extent(b);
        if e.overlaps_band(-half, half) {
            let t = lane.centerline.sample(lane.project(b.center.position()).s).1;
            out.push(Occupant { s_min: e.s_min, s_max: e.s_max, v_s: v.dot(t), vehicle });
        }
    };
    for a in &obs.agents {
        add(&a.bbox, a.velocity, true);
    }
    for o in &obs.obstacles {
        add(&o.bbox, crate::geometry::Vec2::new(0.0, 0.0), false);
    }
    for p in &obs.pedestrians {
        add(&p.bbox(), p.velocity, false);
    }
    out
}

struct LaneView {
    lead: Option<Occupant>,
    follower: Option<Occupant>,
    /// Something overlaps the ego's longitudinal span.
    alongside: bool,
    ego_rear: f64,
    ego_front: f64,
}

fn view(obs: &Observation<'_>, lane: &LaneSegment) -> LaneView {
    let s = lane.project(obs.ego.bbox.center.position()).s;
    let (rear, front) = (s - 0.5 * EGO_LENGTH, s + 0.5 * EGO_LENGTH);
    let occ = occupants(obs, lane);
    let lead = occ
        .iter()
        .filter(|o| o.s_min >= front)
        .min_by(|a, b| a.s_min.total_cmp(&b.s_min))
        .copied();
    let follower = occ
        .iter()
        .filter(|o| o.vehicle && o.s_max <= rear)
        .max_by(|a, b| a.s_max.total_cmp(&b.s_max))
        .copied();
    let alongside = occ.iter().any(|o| o.s_max > rear && o.s_min < front);
    LaneView { lead, follower, alongside, ego_rear: rear, ego_front: front }
}

fn accel(v: f64, lead: Option<Lead>, p: &IdmParams<f64>) -> f64 {
    idm_acceleration(v, lead.map(|(vl, g)| (vl, g.max(0.05))), p).unwrap_or(crate::agents::EMERGENCY_DECEL)
}

/// Side of the route relative to `lane`: +1 left, -1 right, 0 on route
/// with nothing pending.
fn goal_side(obs: &Observation<'_>, lane: &LaneSegment) -> i32 {
    let route = obs.route;
    match route.next_change_after(&lane.id) {
        Some(EdgeKind::Left) => return 1,
        Some(EdgeKind::Right) => return -1,
        _ => {}
    }
    if route.lane_sequence.contains(&lane.id) {
        return 0;
    }
    for (side, step) in [(1, true), (-1, false)] {
        let mut cur = Some(lane.id.clone());
        while let Some(id) = cur {
            if route.lane_sequence.contains(&id) {
                return side;
            }
            let l = obs.graph.lane(&id).expect("neighbor exists");
            cur = if step { l.left_neighbor.clone() } else { l.right_neighbor.clone() };
        }
    }
    0
}

/// Incentive of moving from `cur` to `target`; `None` when the safety
/// criterion or an alongside vehicle vetoes it.
fn incentive(obs: &Observation<'_>, cur: &LaneSegment, target: &LaneSegment, mp: &MobilParams, idm: &IdmParams<f64>) -> Option<f64> {
    let v = obs.ego.speed;
    let pc = IdmParams { desired_speed: cur.speed_limit, ..*idm };
    let pt = IdmParams { desired_speed: target.speed_limit, ..*idm };
    let c = view(obs, cur);
    let t = view(obs, target);
    if t.alongside {
        return None;
    }
    let lead_gap = |l: &Option<Occupant>, from: f64| l.map(|o| (o.v_s, o.s_min - from));
    let a_cur = accel(v, lead_gap(&c.lead, c.ego_front), &pc);
    let a_new = accel(v, lead_gap(&t.lead, t.ego_front), &pt);

    let mut courtesy = 0.0;
    if let Some(nf) = t.follower {
        let before = accel(nf.v_s, lead_gap(&t.lead, nf.s_max), &pt);
        let after = accel(nf.v_s, Some((v, t.ego_rear - nf.s_max)), &pt);
        if after < -mp.b_safe {
            return None;
        }
        courtesy += after - before;
    }
    if let Some(of) = c.follower {
        let before = accel(of.v_s, Some((v, c.ego_rear - of.s_max)), &pc);
        let after = accel(of.v_s, lead_gap(&c.lead, of.s_max), &pc);
        courtesy += after - before;
    }
    Some(a_new - a_cur + mp.politeness * courtesy)
}

/// MOBIL lane choice among same-direction neighbors of the current lane.
pub fn mobil_decide(obs: &Observation<'_>, mp: &MobilParams, idm: &IdmParams<f64>) -> Option<LaneId> {
    let cur = obs.current_lane();
    let side = goal_side(obs, cur);
    let d = cur.project(obs.ego.bbox.center.position()).d;
    let heading_err = crate::scalar::normalize_angle(
        obs.ego.bbox.center.heading - cur.centerline.heading_at(cur.project(obs.ego.bbox.center.position()).s),
    );
    let lateral_speed = obs.ego.speed * heading_err.sin();

    let mut scored: Vec<(f64, LaneId)> = Vec::new();
    for (dir, nb) in [(1, &cur.left_neighbor), (-1, &cur.right_neighbor)] {
        let Some(id) = nb else { continue };
        let target = obs.graph.lane(id).expect("validated neighbor");
        let Some(inc) = incentive(obs, cur, target, mp, idm) else { continue };
        let committed = dir as f64 * d > COMMIT_OFFSET && dir as f64 * lateral_speed > COMMIT_LATERAL_SPEED;
        if committed {
            return Some(id.clone());
        }
        let bias = if side == dir { mp.route_bias } else { -mp.route_bias };
        let total = inc + bias;
        if total > mp.a_threshold {
            scored.push((total, id.clone()));
        }
    }
    match scored.as_slice() {
        [] => None,
        [(_, id)] => Some(id.clone()),
        [(a, left), (b, right), ..] => {
            if (a - b).abs() > TIE_TOLERANCE {
                Some(if a > b { left.clone() } else { right.clone() })
            } else {
                // ties go to the goal side; with none, no side is preferred
                match side {
                    1 => Some(left.clone()),
                    -1 => Some(right.clone()),
                    _ => None,
                }
            }
        }
    }
}

pub fn idm_mobil_plan(obs: &Observation<'_>, mp: &MobilParams, idm: &IdmParams<f64>) -> Trajectory {
    match mobil_decide(obs, mp, idm) {
        Some(target) => {
            let path = ReferencePath::along_lane(obs.graph, &target, Some(obs.route));
            plan_on_path(obs, &path, 0.0, idm)
        }
        None => idm_planner_plan(obs, idm),
    }
}

#[derive(Debug, Clone)]
pub struct IdmMobilPlanner {
    pub mobil: MobilParams,
    pub idm: IdmParams<f64>,
}

impl Default for IdmMobilPlanner {
    fn default() -> Self {
        Self { mobil: MobilParams::default(), idm: IdmParams::with_desired_speed(1.0) }
    }
}

impl Planner for IdmMobilPlanner {
    fn name(&self) -> &str {
        "idm_mobil"
    }

    fn plan(&mut self, obs: &Observation<'_>) -> Result<Trajectory, PlanError> {
        Ok(idm_mobil_plan(obs, &self.mobil, &self.idm))
    }
}

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::geometry::{boxes_collide, fraction_outside_drivable, OrientedBox, Pose2D, Vec2};
use crate::map::{lane_changes_required, LaneGraph, LaneSegment, Route};
use crate::scalar::normalize_angle;
use crate::scenario::ScenarioSpec;
use crate::sim::{actors_at, ego_at_fault, ActorRef, SimTrace, Snapshot, EGO_STOPPED};

use super::MetricConfig;

const TTC_PROBES: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95];
/// Lateral margin beside the ego footprint that still justifies stopping, m.
const STATIONARY_BAND: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionRecord {
    pub tick: usize,
    pub other: ActorRef,
    pub at_fault: bool,
}

/// Lane whose corridor holds `p`, nearest centerline first.
fn lane_at<'a>(g: &'a LaneGraph, p: Vec2<f64>) -> Option<&'a LaneSegment> {
    g.lanes()
        .filter(|l| l.contains(p))
        .min_by(|a, b| a.project(p).d.abs().total_cmp(&b.project(p).d.abs()))
}

/// Arclength along the route. Successor edges add the previous lane's
/// length; neighbor edges keep the arclength.
pub fn route_station(route: &Route, g: &LaneGraph, p: Vec2<f64>) -> f64 {
    let mut base = 0.0;
    let mut best: Option<(bool, f64, f64)> = None;
    for (i, id) in route.lane_sequence.iter().enumerate() {
        let Some(lane) = g.lane(id) else { continue };
        if i > 0 && !route.edges[i - 1].is_lane_change() {
            base += g.lane(&route.lane_sequence[i - 1]).map_or(0.0, LaneSegment::length);
        }
        let f = lane.project(p);
        let inside = f.s > 0.0 && f.s < lane.length();
        let better = match best {
            None => true,
            Some((bi, bd, _)) => (inside && !bi) || (inside == bi && f.d.abs() < bd),
        };
        if better {
            best = Some((inside, f.d.abs(), base + f.s));
        }
    }
    best.map_or(0.0, |b| b.2)
}

fn ego_position(s: &Snapshot) -> Vec2<f64> {
    s.ego.bbox.center.position()
}

pub(super) fn trace_progress(trace: &SimTrace, spec: &ScenarioSpec) -> f64 {
    match (trace.snapshots.first(), trace.snapshots.last()) {
        (Some(a), Some(b)) => {
            route_station(&spec.route, &spec.graph, ego_position(b))
                - route_station(&spec.route, &spec.graph, ego_position(a))
        }
        _ => 0.0,
    }
}

/// Contact onsets recomputed from the snapshots, with blame.
fn collision_records(trace: &SimTrace, spec: &ScenarioSpec) -> Vec<CollisionRecord> {
    let mut out = Vec::new();
    let mut touching: BTreeSet<ActorRef> = BTreeSet::new();
    for w in trace.snapshots.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        let mut now = BTreeSet::new();
        for a in actors_at(cur, &spec.obstacles) {
            if !boxes_collide(&cur.ego.bbox, &a.bbox) {
                continue;
            }
            now.insert(a.actor);
            if !touching.contains(&a.actor) {
                let at_fault = ego_at_fault(prev, cur, &a, &spec.graph, trace.dt);
                out.push(CollisionRecord { tick: cur.tick, other: a.actor, at_fault });
            }
        }
        touching = now;
    }
    out
}

/// 0 when any contact is the ego's fault.
pub fn collision_metric(trace: &SimTrace, spec: &ScenarioSpec) -> (f64, Vec<CollisionRecord>) {
    let records = collision_records(trace, spec);
    let m = if records.iter().any(|r| r.at_fault) { 0.0 } else { 1.0 };
    (m, records)
}

pub fn drivable_area_metric(trace: &SimTrace, spec: &ScenarioSpec, cfg: &MetricConfig) -> f64 {
    let area = spec.graph.drivable_area();
    let off = trace.snapshots.iter().any(|s| fraction_outside_drivable(&s.ego.bbox, area) > cfg.area_tolerance);
    if off {
        0.0
    } else {
        1.0
    }
}

/// Distance the ego covered against the direction of the lane it was in.
pub fn wrong_way_distance(trace: &SimTrace, g: &LaneGraph) -> f64 {
    trace
        .snapshots
        .windows(2)
        .map(|w| {
            let (a, b) = (ego_position(&w[0]), ego_position(&w[1]));
            let step = b - a;
            match lane_at(g, (a + b) * 0.5) {
                Some(lane) => {
                    let (_, tangent) = lane.centerline.sample(lane.project(a).s);
                    let along = step.dot(tangent);
                    if along < 0.0 {
                        -along
                    } else {
                        0.0
                    }
                }
                None => 0.0,
            }
        })
        .sum()
}

pub fn driving_direction_metric(trace: &SimTrace, spec: &ScenarioSpec, cfg: &MetricConfig) -> f64 {
    if spec.kind.oncoming_pass_expected() {
        return 1.0;
    }
    let d = wrong_way_distance(trace, &spec.graph);
    if d < cfg.direction_ok {
        1.0
    } else if d < cfg.direction_half {
        0.5
    } else {
        0.0
    }
}

/// Whether some actor sits close ahead in the ego's path.
fn stop_justified(snap: &Snapshot, spec: &ScenarioSpec, clearance: f64) -> bool {
    let ego = snap.ego.bbox;
    let half_l = 0.5 * ego.length;
    let band = 0.5 * ego.width + STATIONARY_BAND;
    actors_at(snap, &spec.obstacles).iter().any(|a| {
        let local: Vec<Vec2<f64>> = a.bbox.corners().iter().map(|&c| ego.center.to_local(c)).collect();
        let (xmin, xmax) = local.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.x), hi.max(p.x)));
        let (ymin, ymax) = local.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.y), hi.max(p.y)));
        xmax > half_l && xmin - half_l <= clearance && ymax >= -band && ymin <= band
    })
}

/// 0 when the ego stands still without reason for longer than allowed.
pub fn stationary_metric(trace: &SimTrace, spec: &ScenarioSpec, cfg: &MetricConfig) -> f64 {
    let mut start: Option<f64> = None;
    for s in &trace.snapshots {
        let idle = s.ego.speed < EGO_STOPPED && !stop_justified(s, spec, cfg.stationary_clearance);
        if idle {
            let t0 = *start.get_or_insert(s.t);
            if s.t - t0 > cfg.max_stationary + 1e-9 {
                return 0.0;
            }
        } else {
            start = None;
        }
    }
    1.0
}

/// Whether the ego's front reaches any actor within the threshold when
/// everything keeps its current velocity.
fn ttc_violated(snap: &Snapshot, spec: &ScenarioSpec, threshold: f64) -> bool {
    let ego = snap.ego.bbox;
    if snap.ego.speed < EGO_STOPPED {
        return false;
    }
    let actors = actors_at(snap, &spec.obstacles);
    let dir = ego.center.direction();
    TTC_PROBES.iter().filter(|&&tau| tau <= threshold).any(|&tau| {
        let p = ego.center.position() + dir * (snap.ego.speed * tau);
        let front = ego.with_center(Pose2D::new(p.x, p.y, ego.center.heading)).half(true);
        actors.iter().any(|a| {
            let c = a.bbox.center.position() + a.velocity * tau;
            boxes_collide(&front, &a.bbox.with_center(Pose2D::new(c.x, c.y, a.bbox.center.heading)))
        })
    })
}

/// Fraction of ticks whose projected time to collision stays above the threshold.
pub fn ttc_metric(trace: &SimTrace, spec: &ScenarioSpec, cfg: &MetricConfig) -> f64 {
    let n = trace.snapshots.len();
    if n == 0 {
        return 1.0;
    }
    let bad = trace.snapshots.iter().filter(|s| ttc_violated(s, spec, cfg.ttc_threshold)).count();
    1.0 - bad as f64 / n as f64
}

fn smooth(x: &[f64], window: usize) -> Vec<f64> {
    let half = (window.max(1) / 2) as isize;
    let n = x.len() as isize;
    (0..n)
        .map(|i| {
            let sum: f64 = (i - half..=i + half).map(|j| x[j.clamp(0, n - 1) as usize]).sum();
            sum / (2 * half + 1) as f64
        })
        .collect()
}

fn derivative(x: &[f64], dt: f64) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| match (i, n) {
            (_, 0 | 1) => 0.0,
            (0, _) => (x[1] - x[0]) / dt,
            (i, n) if i == n - 1 => (x[i] - x[i - 1]) / dt,
            (i, _) => (x[i + 1] - x[i - 1]) / (2.0 * dt),
        })
        .collect()
}

/// 1 when every smoothed comfort signal stays within bounds.
pub fn comfort_metric(trace: &SimTrace, cfg: &MetricConfig) -> f64 {
    let b = &cfg.comfort;
    let w = b.smoothing_window;
    let dt = trace.dt;
    if trace.snapshots.len() < 2 {
        return 1.0;
    }
    let d = |x: &[f64]| derivative(&smooth(x, w), dt);
    let speed: Vec<f64> = trace.snapshots.iter().map(|s| s.ego.speed).collect();
    let mut heading = Vec::with_capacity(speed.len());
    for s in &trace.snapshots {
        let h = s.ego.bbox.center.heading;
        let unwrapped = match heading.last() {
            Some(&prev) => prev + normalize_angle(h - prev),
            None => h,
        };
        heading.push(unwrapped);
    }
    let lon_accel = d(&speed);
    let lon_jerk = d(&lon_accel);
    let yaw_rate = d(&heading);
    let yaw_accel = d(&yaw_rate);
    let v = smooth(&speed, w);
    let lat_accel: Vec<f64> = v.iter().zip(&yaw_rate).map(|(v, r)| v * r).collect();
    let lat_jerk = d(&lat_accel);

    let ok = lon_accel.iter().all(|a| (b.min_lon_accel..=b.max_lon_accel).contains(a))
        && lat_accel.iter().all(|a| a.abs() <= b.max_lat_accel)
        && lon_jerk.iter().all(|j| j.abs() <= b.max_lon_jerk)
        && lon_jerk.iter().zip(&lat_jerk).all(|(a, b2)| a.hypot(*b2) <= b.max_jerk)
        && yaw_rate.iter().all(|r| r.abs() <= b.max_yaw_rate)
        && yaw_accel.iter().all(|r| r.abs() <= b.max_yaw_accel);
    if ok {
        1.0
    } else {
        0.0
    }
}

fn speed_limit_at(g: &LaneGraph, route: &Route, p: Vec2<f64>) -> f64 {
    lane_at(g, p)
        .or_else(|| g.lane(route.first_lane()))
        .map_or(f64::INFINITY, |l| l.speed_limit)
}

/// One minus the over-limit speed integral relative to the limit integral.
pub fn speed_limit_metric(trace: &SimTrace, spec: &ScenarioSpec) -> f64 {
    let n = trace.snapshots.len().saturating_sub(1);
    if n == 0 {
        return 1.0;
    }
    let (mut over, mut allowed) = (0.0, 0.0);
    for s in &trace.snapshots[..n] {
        let limit = speed_limit_at(&spec.graph, &spec.route, ego_position(s));
        over += (s.ego.speed - limit).max(0.0) * trace.dt;
        allowed += limit * trace.dt;
    }
    if allowed <= 0.0 {
        return 1.0;
    }
    (1.0 - over / allowed).max(0.0)
}

/// Ego route progress over the reference progress, clamped to [0, 1].
pub fn progress_metric(trace: &SimTrace, spec: &ScenarioSpec, reference: f64) -> f64 {
    if reference <= 1e-6 {
        return 1.0;
    }
    (trace_progress(trace, spec) / reference).clamp(0.0, 1.0)
}

/// Fraction of the route's lane changes that were completed and held.
pub fn lane_change_completion(trace: &SimTrace, spec: &ScenarioSpec, cfg: &MetricConfig) -> f64 {
    let required = lane_changes_required(&spec.route);
    if required == 0 {
        return 1.0;
    }
    let done: Vec<usize> = trace
        .snapshots
        .iter()
        .map(|s| {
            lane_at(&spec.graph, ego_position(s))
                .and_then(|l| spec.route.changes_done_at(&l.id))
                .unwrap_or(0)
        })
        .collect();
    let hold = (cfg.lane_change_hold / trace.dt).round() as usize + 1;
    let completed = done.windows(hold.max(1)).map(|w| *w.iter().min().expect("non-empty")).max().unwrap_or(0);
    completed.min(required) as f64 / required as f64
}

/// 1 once the ego front has cleared every blocking obstacle plus a margin.
pub fn min_progress_multiplier(trace: &SimTrace, spec: &ScenarioSpec, cfg: &MetricConfig) -> f64 {
    let far_end = spec
        .blocking_obstacles()
        .map(|o| far_end_station(&spec.route, &spec.graph, &o.bbox))
        .fold(f64::NEG_INFINITY, f64::max);
    if !far_end.is_finite() {
        return 1.0;
    }
    let reached = trace
        .snapshots
        .iter()
        .map(|s| route_station(&spec.route, &spec.graph, ego_position(s)) + 0.5 * s.ego.bbox.length)
        .fold(f64::NEG_INFINITY, f64::max);
    if reached >= far_end + cfg.min_progress_margin {
        1.0
    } else {
        0.0
    }
}

fn far_end_station(route: &Route, g: &LaneGraph, b: &OrientedBox<f64>) -> f64 {
    b.corners().iter().map(|&c| route_station(route, g, c)).fold(f64::NEG_INFINITY, f64::max)
}

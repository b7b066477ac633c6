use crate::agents::{idm_terms, IdmParams, EMERGENCY_DECEL};
use crate::geometry::{FrenetPoint, OrientedBox, Polyline, Pose2D, Vec2};
use crate::map::{EdgeKind, LaneGraph, LaneId, Route};

use super::{EgoObs, Observation, TrajPoint, Trajectory, TRAJ_DT, TRAJ_SAMPLES};

/// Straight extension past the last lane so long horizons stay defined, m.
const EXTENSION: f64 = 200.0;
/// How far successors are chained, m.
const CHAIN_LENGTH: f64 = 600.0;
/// Travel time of a full-lane-width lateral move, s.
pub const MERGE_TIME: f64 = 3.0;
/// Shortest lateral blend, m.
const MIN_BLEND: f64 = 10.0;
const MAX_INITIAL_SLOPE: f64 = 0.5;

/// Centerline of a lane and its successors, extended straight at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePath {
    pub lane: LaneId,
    pub line: Polyline<f64>,
    pub lane_width: f64,
    pub speed_limit: f64,
}

impl ReferencePath {
    /// Follows route successors where the route says so, otherwise the
    /// first successor of each lane.
    pub fn along_lane(graph: &LaneGraph, lane: &LaneId, route: Option<&Route>) -> Self {
        let first = graph.lane(lane).expect("lane exists");
        let mut pts: Vec<Vec2<f64>> = Vec::new();
        let mut cur = first;
        let mut total = 0.0;
        let mut visited = vec![cur.id.clone()];
        loop {
            for &p in cur.centerline.points() {
                if pts.last().map_or(true, |q: &Vec2<f64>| q.dist(p) > 1e-6) {
                    pts.push(p);
                }
            }
            total += cur.length();
            if total > CHAIN_LENGTH {
                break;
            }
            let routed = route.and_then(|r| {
                let i = r.lane_sequence.iter().position(|l| *l == cur.id)?;
                (r.edges.get(i) == Some(&EdgeKind::Successor)).then(|| r.lane_sequence[i + 1].clone())
            });
            let Some(next) = routed.or_else(|| cur.successors.first().cloned()) else { break };
            if visited.contains(&next) {
                break;
            }
            visited.push(next.clone());
            cur = graph.lane(&next).expect("validated successor");
        }
        let n = pts.len();
        let dir = pts[n - 1] - pts[n - 2];
        let end = pts[n - 1] + dir * (EXTENSION / dir.norm());
        pts.push(end);
        Self {
            lane: lane.clone(),
            line: Polyline::new(pts).expect("chained centerline is well formed"),
            lane_width: first.width,
            speed_limit: first.speed_limit,
        }
    }

    pub fn project(&self, p: Vec2<f64>) -> FrenetPoint<f64> {
        self.line.project(p)
    }

    /// Pose at arclength `s` and lateral offset `d` with lateral slope `dd_ds`.
    pub fn pose(&self, s: f64, d: f64, dd_ds: f64) -> Pose2D<f64> {
        let (p, t) = self.line.sample(s);
        let q = p + t.perp() * d;
        Pose2D::new(q.x, q.y, t.angle() + dd_ds.atan())
    }

    /// Blend length used to move `delta_d` sideways at speed `v`.
    pub fn blend_length(&self, v: f64, delta_d: f64) -> f64 {
        (v * MERGE_TIME * delta_d.abs() / self.lane_width).max(MIN_BLEND)
    }

    /// Trajectory that follows `speeds` along the path while blending from
    /// the ego's lateral offset to `d_target`.
    pub fn build_trajectory(&self, ego_f: FrenetPoint<f64>, ego: &EgoObs, d_target: f64, speeds: &[f64]) -> Trajectory {
        let blend = LateralBlend::new(self, ego_f, ego, d_target);
        let mut s = ego_f.s;
        let mut samples = Vec::with_capacity(speeds.len());
        for (k, &v) in speeds.iter().enumerate() {
            if k > 0 {
                s += 0.5 * (speeds[k - 1] + v) * TRAJ_DT;
            }
            let (d, slope) = blend.at(s);
            samples.push(TrajPoint { t: k as f64 * TRAJ_DT, pose: self.pose(s, d, slope), speed: v });
        }
        Trajectory { samples }
    }

    /// Path arclength reached after following `speeds` from `s0`.
    pub fn arclengths(s0: f64, speeds: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(speeds.len());
        let mut s = s0;
        for (k, &v) in speeds.iter().enumerate() {
            if k > 0 {
                s += 0.5 * (speeds[k - 1] + v) * TRAJ_DT;
            }
            out.push(s);
        }
        out
    }
}

/// Quintic lateral profile over arclength with a prescribed initial slope.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LateralBlend {
    s0: f64,
    len: f64,
    d0: f64,
    d1: f64,
    m0: f64,
}

impl LateralBlend {
    pub(crate) fn new(path: &ReferencePath, ego_f: FrenetPoint<f64>, ego: &EgoObs, d_target: f64) -> Self {
        let path_heading = path.line.heading_at(ego_f.s);
        let err = crate::scalar::normalize_angle(ego.bbox.center.heading - path_heading);
        let m0 = err.tan().clamp(-MAX_INITIAL_SLOPE, MAX_INITIAL_SLOPE);
        Self {
            s0: ego_f.s,
            len: path.blend_length(ego.speed, d_target - ego_f.d),
            d0: ego_f.d,
            d1: d_target,
            m0,
        }
    }

    /// Offset and slope `dd/ds` at arclength `s`.
    pub(crate) fn at(&self, s: f64) -> (f64, f64) {
        let u = ((s - self.s0) / self.len).clamp(0.0, 1.0);
        if u >= 1.0 {
            return (self.d1, 0.0);
        }
        // quintic Hermite: h0 for position, h1 for initial slope (in u units)
        let (u2, u3) = (u * u, u * u * u);
        let (u4, u5) = (u3 * u, u3 * u2);
        let h0 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
        let h1 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
        let dh0 = -30.0 * u2 + 60.0 * u3 - 30.0 * u4;
        let dh1 = 1.0 - 18.0 * u2 + 32.0 * u3 - 15.0 * u4;
        let m = self.m0 * self.len;
        let d = self.d1 + (self.d0 - self.d1) * h0 + m * h1;
        let slope = ((self.d0 - self.d1) * dh0 + m * dh1) / self.len;
        (d, slope)
    }
}

/// Actor in path coordinates at observation time.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub bbox: OrientedBox<f64>,
    pub velocity: Vec2<f64>,
    pub s_min: f64,
    pub s_max: f64,
    pub d_min: f64,
    pub d_max: f64,
    /// Velocity component along the path tangent.
    pub v_s: f64,
    pub is_static: bool,
    pub is_pedestrian: bool,
}

impl Track {
    pub fn overlaps_band(&self, lo: f64, hi: f64) -> bool {
        self.d_max >= lo && self.d_min <= hi
    }

    /// Box moved at constant velocity for `t` seconds.
    pub fn bbox_at(&self, t: f64) -> OrientedBox<f64> {
        if self.is_static || t == 0.0 {
            return self.bbox;
        }
        let c = self.bbox.center;
        self.bbox.with_center(Pose2D::new(c.x + self.velocity.x * t, c.y + self.velocity.y * t, c.heading))
    }
}

/// Every observed actor projected onto one reference path.
#[derive(Debug, Clone, PartialEq)]
pub struct Tracks {
    pub items: Vec<Track>,
}

/// Pedestrians count as leads slightly outside the corridor, m.
const PEDESTRIAN_BAND_MARGIN: f64 = 0.5;

impl Tracks {
    pub fn new(path: &ReferencePath, obs: &Observation<'_>) -> Self {
        let mut items = Vec::new();
        let mut push = |bbox: OrientedBox<f64>, velocity: Vec2<f64>, is_static: bool, is_pedestrian: bool| {
            let e = path.line.box_extent(&bbox);
            let (_, tangent) = path.line.sample(path.project(bbox.center.position()).s);
            items.push(Track {
                bbox,
                velocity,
                s_min: e.s_min,
                s_max: e.s_max,
                d_min: e.d_min,
                d_max: e.d_max,
                v_s: velocity.dot(tangent),
                is_static,
                is_pedestrian,
            });
        };
        for a in &obs.agents {
            push(a.bbox, a.velocity, false, false);
        }
        for p in &obs.pedestrians {
            push(p.bbox(), p.velocity, false, true);
        }
        for o in &obs.obstacles {
            push(o.bbox, Vec2::new(0.0, 0.0), true, false);
        }
        Self { items }
    }

    /// Leads `(s_rear, v_s)` in the lateral band `[lo, hi]` ahead of `front_s`.
    pub fn leads_in_band(&self, lo: f64, hi: f64, front_s: f64) -> Vec<(f64, f64)> {
        self.items
            .iter()
            .filter(|t| {
                let m = if t.is_pedestrian { PEDESTRIAN_BAND_MARGIN } else { 0.0 };
                t.overlaps_band(lo - m, hi + m) && t.s_max > front_s
            })
            .map(|t| (t.s_min, t.v_s))
            .collect()
    }
}

/// IDM speed samples for an ego whose front is at `front_s`, following the
/// constant-velocity `leads` toward `target` speed.
pub(crate) fn idm_profile(v0: f64, front_s: f64, leads: &[(f64, f64)], target: f64, base: &IdmParams<f64>) -> Vec<f64> {
    let params = IdmParams { desired_speed: target.max(1e-3), ..*base };
    let mut speeds = Vec::with_capacity(TRAJ_SAMPLES);
    let mut v = v0.max(0.0);
    let mut front = front_s;
    speeds.push(v);
    for k in 1..TRAJ_SAMPLES {
        let t = (k - 1) as f64 * TRAJ_DT;
        let lead = leads
            .iter()
            .map(|&(s, vs)| (s + vs * t, vs))
            .filter(|&(s, _)| s > front - 1.0)
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(s, vs)| (vs, (s - front).max(0.05)));
        let accel = if target < 0.05 && lead.is_none() {
            if v > 0.0 { -base.comfort_decel } else { 0.0 }
        } else {
            let (free, inter) = idm_terms(v, lead, &params).unwrap_or((EMERGENCY_DECEL, 0.0));
            let free = if v > target { free.max(-base.comfort_decel) } else { free };
            (free + inter).clamp(EMERGENCY_DECEL, base.max_accel)
        };
        let next = (v + accel * TRAJ_DT).max(0.0);
        front += 0.5 * (v + next) * TRAJ_DT;
        v = next;
        speeds.push(v);
    }
    speeds
}

use crate::agents::IdmParams;
use crate::geometry::{boxes_collide, fraction_outside_drivable_grid, OrientedBox, Polygon};
use crate::scenario::{EGO_LENGTH, EGO_WIDTH};

use super::reference::{idm_profile, Track};
use super::{
    stop_profile, BehaviorLabel, BehaviorOption, Observation, Planner, PlanError, ReferencePath, Tracks,
    Trajectory, TRAJ_DT,
};

pub const LATERAL_DELTAS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];
pub const SPEED_FRACTIONS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];
/// Deceleration of the full-stop candidate, m/s^2.
const STOP_DECEL: f64 = 4.0;
/// Extra lateral room around the ego body when picking leads, m.
const LEAD_BAND_MARGIN: f64 = 0.3;
/// Clearance kept around pedestrians by the collision check, m.
pub const PEDESTRIAN_CLEARANCE: f64 = 0.5;
const COARSE_GRID: usize = 8;
const OFFROAD_TOLERANCE: f64 = 0.05;
/// Projection times of the TTC check, s.
const TTC_PROBES: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95];
/// Below this speed the TTC check is skipped, m/s.
const TTC_MIN_SPEED: f64 = 0.1;
const LON_ACCEL_BOUNDS: (f64, f64) = (-4.05, 2.40);
const MAX_LAT_ACCEL: f64 = 4.89;

/// Cost weights. At-fault collisions and leaving the drivable area are
/// not weighted: such candidates are infeasible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostWeights {
    pub progress: f64,
    pub ttc: f64,
    pub lateral: f64,
    pub comfort: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self { progress: 5.0, ttc: 5.0, lateral: 1.0, comfort: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    pub weights: CostWeights,
    /// Evaluation window, s.
    pub window: f64,
    /// `desired_speed` is overridden per speed profile.
    pub idm: IdmParams<f64>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { weights: CostWeights::default(), window: 2.0, idm: IdmParams::with_desired_speed(1.0) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateEval {
    pub delta: f64,
    /// Offset from the behavior centerline, m.
    pub offset: f64,
    /// Index into `SPEED_FRACTIONS`, or `SPEED_FRACTIONS.len()` for the stop profile.
    pub profile: usize,
    pub trajectory: Trajectory,
    pub collision: bool,
    pub off_road: bool,
    /// Arclength gained within the window, m.
    pub progress: f64,
    pub ttc_fraction: f64,
    pub comfort_fraction: f64,
    /// Total cost; infinite when infeasible.
    pub cost: f64,
}

impl CandidateEval {
    pub fn feasible(&self) -> bool {
        !self.collision && !self.off_road
    }
}

fn default_behavior(obs: &Observation<'_>) -> BehaviorOption {
    let lane = obs.current_lane();
    BehaviorOption {
        label: BehaviorLabel::FollowLane,
        centerline: lane.id.clone(),
        lateral_offset: 0.0,
        target_speed_cap: lane.speed_limit,
        blocker: None,
    }
}

fn ego_box(t: &Trajectory, k: usize) -> OrientedBox<f64> {
    OrientedBox::new(t.samples[k].pose, EGO_LENGTH, EGO_WIDTH)
}

fn window_steps(window: f64) -> usize {
    (window / TRAJ_DT).round() as usize
}

/// Builds and scores all 30 candidates around `behavior`.
pub fn evaluate_candidates(obs: &Observation<'_>, cfg: &SamplingConfig, behavior: Option<&BehaviorOption>) -> Vec<CandidateEval> {
    let fallback;
    let behavior = match behavior {
        Some(b) => b,
        None => {
            fallback = default_behavior(obs);
            &fallback
        }
    };
    let path = ReferencePath::along_lane(obs.graph, &behavior.centerline, Some(obs.route));
    let f = path.project(obs.ego.bbox.center.position());
    let front = f.s + 0.5 * EGO_LENGTH;
    let tracks = Tracks::new(&path, obs);
    let cap = path.speed_limit.min(behavior.target_speed_cap).max(0.0);
    let steps = window_steps(cfg.window);
    let reach = obs.ego.speed.max(cap) * (cfg.window + 1.0) + 2.0 * EGO_LENGTH;
    let near = nearby_tracks(&tracks.items, obs, reach, cfg.window);
    let area = nearby_area(obs, reach);

    let mut out = Vec::with_capacity(LATERAL_DELTAS.len() * (SPEED_FRACTIONS.len() + 1));
    for &delta in &LATERAL_DELTAS {
        let d = behavior.lateral_offset + delta;
        let hw = 0.5 * EGO_WIDTH + LEAD_BAND_MARGIN;
        let leads = tracks.leads_in_band(d - hw, d + hw, front);
        for profile in 0..=SPEED_FRACTIONS.len() {
            let speeds = match SPEED_FRACTIONS.get(profile) {
                Some(frac) => idm_profile(obs.ego.speed, front, &leads, frac * cap, &cfg.idm),
                None => stop_profile(obs.ego.speed, STOP_DECEL),
            };
            let trajectory = path.build_trajectory(f, &obs.ego, d, &speeds);
            let s_end = ReferencePath::arclengths(f.s, &speeds)[steps.min(speeds.len() - 1)];
            out.push(score(delta, d, profile, trajectory, s_end - f.s, &near, &area, steps));
        }
    }
    let best_progress = out.iter().filter(|c| c.feasible()).map(|c| c.progress).fold(0.0, f64::max);
    let w = cfg.weights;
    for c in &mut out {
        c.cost = if c.feasible() {
            let progress_loss = if best_progress > 1e-9 { 1.0 - c.progress / best_progress } else { 0.0 };
            w.progress * progress_loss + w.ttc * c.ttc_fraction + w.lateral * c.delta.abs() + w.comfort * c.comfort_fraction
        } else {
            f64::INFINITY
        };
    }
    out
}

fn nearby_tracks<'t>(items: &'t [Track], obs: &Observation<'_>, reach: f64, window: f64) -> Vec<&'t Track> {
    let ego = obs.ego.bbox.center.position();
    items
        .iter()
        .filter(|t| {
            let travel = t.velocity.norm() * (window + 1.0);
            t.bbox.center.position().dist(ego) <= reach + travel + t.bbox.radius()
        })
        .collect()
}

fn nearby_area(obs: &Observation<'_>, reach: f64) -> Vec<Polygon<f64>> {
    let c = obs.ego.bbox.center.position();
    let r = reach + EGO_LENGTH;
    obs.graph
        .drivable_area()
        .iter()
        .filter(|p| {
            let (lo, hi) = p.bounds();
            c.x + r >= lo.x && c.x - r <= hi.x && c.y + r >= lo.y && c.y - r <= hi.y
        })
        .cloned()
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn score(
    delta: f64,
    offset: f64,
    profile: usize,
    trajectory: Trajectory,
    progress: f64,
    tracks: &[&Track],
    area: &[Polygon<f64>],
    steps: usize,
) -> CandidateEval {
    let steps = steps.min(trajectory.samples.len() - 1);
    let mut collision = false;
    let mut off_road = false;
    let mut ttc_hits = 0usize;
    let mut comfort_hits = 0usize;
    for k in 0..=steps {
        let sample = trajectory.samples[k];
        let ego = ego_box(&trajectory, k);
        let front = ego.half(true);
        // vehicles only count when the front half hits them; anything else counts on any contact
        if !collision
            && tracks.iter().any(|tr| {
                let b = tr.bbox_at(sample.t);
                if tr.is_pedestrian {
                    let c = 2.0 * PEDESTRIAN_CLEARANCE;
                    boxes_collide(&ego, &OrientedBox::new(b.center, b.length + c, b.width + c))
                } else {
                    boxes_collide(if tr.is_static { &ego } else { &front }, &b)
                }
            })
        {
            collision = true;
        }
        if !off_road && fraction_outside_drivable_grid(&ego, area, COARSE_GRID) > OFFROAD_TOLERANCE {
            off_road = true;
        }
        if sample.speed >= TTC_MIN_SPEED && ttc_conflict(&front, sample.speed, sample.t, tracks) {
            ttc_hits += 1;
        }
        if k < steps && uncomfortable(&trajectory, k) {
            comfort_hits += 1;
        }
    }
    CandidateEval {
        delta,
        offset,
        profile,
        trajectory,
        collision,
        off_road,
        progress,
        ttc_fraction: ttc_hits as f64 / (steps + 1) as f64,
        comfort_fraction: if steps > 0 { comfort_hits as f64 / steps as f64 } else { 0.0 },
        cost: f64::INFINITY,
    }
}

/// True when the ego front half, projected at its current speed and
/// heading, meets an actor within the probe times.
fn ttc_conflict(front: &OrientedBox<f64>, speed: f64, t: f64, tracks: &[&Track]) -> bool {
    let dir = front.center.direction();
    TTC_PROBES.iter().any(|&tau| {
        let c = front.center;
        let moved = front.with_center(crate::geometry::Pose2D::new(
            c.x + dir.x * speed * tau,
            c.y + dir.y * speed * tau,
            c.heading,
        ));
        tracks.iter().any(|tr| boxes_collide(&moved, &tr.bbox_at(t + tau)))
    })
}

fn uncomfortable(t: &Trajectory, k: usize) -> bool {
    let (a, b) = (t.samples[k], t.samples[k + 1]);
    let lon = (b.speed - a.speed) / TRAJ_DT;
    if lon < LON_ACCEL_BOUNDS.0 || lon > LON_ACCEL_BOUNDS.1 {
        return true;
    }
    let ds = a.pose.position().dist(b.pose.position());
    if ds < 1e-6 {
        return false;
    }
    let kappa = crate::scalar::normalize_angle(b.pose.heading - a.pose.heading) / ds;
    let v = 0.5 * (a.speed + b.speed);
    (v * v * kappa).abs() > MAX_LAT_ACCEL
}

/// Index of the cheapest feasible candidate; ties go to the smaller
/// `|delta|`, then to more progress, then to the earlier candidate.
pub(crate) fn select(evals: &[CandidateEval]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, c) in evals.iter().enumerate() {
        if !c.feasible() {
            continue;
        }
        let better = match best {
            None => true,
            Some(j) => {
                let b = &evals[j];
                c.cost < b.cost
                    || (c.cost == b.cost
                        && (c.delta.abs() < b.delta.abs()
                            || (c.delta.abs() == b.delta.abs() && c.progress > b.progress)))
            }
        };
        if better {
            best = Some(i);
        }
    }
    best
}

/// Full stop at offset 0 of the current lane.
fn stop_on_current_lane(obs: &Observation<'_>) -> Trajectory {
    let lane = obs.current_lane();
    let path = ReferencePath::along_lane(obs.graph, &lane.id, Some(obs.route));
    let f = path.project(obs.ego.bbox.center.position());
    path.build_trajectory(f, &obs.ego, 0.0, &stop_profile(obs.ego.speed, STOP_DECEL))
}

pub fn sampling_planner_plan(obs: &Observation<'_>, cfg: &SamplingConfig, behavior: Option<&BehaviorOption>) -> Trajectory {
    let mut evals = evaluate_candidates(obs, cfg, behavior);
    match select(&evals) {
        Some(i) => evals.swap_remove(i).trajectory,
        None => stop_on_current_lane(obs),
    }
}

#[derive(Debug, Clone, Default)]
pub struct SamplingPlanner {
    pub config: SamplingConfig,
}

impl SamplingPlanner {
    pub fn new(config: SamplingConfig) -> Self {
        Self { config }
    }
}

impl Planner for SamplingPlanner {
    fn name(&self) -> &str {
        "sampling"
    }

    fn plan(&mut self, obs: &Observation<'_>) -> Result<Trajectory, PlanError> {
        Ok(sampling_planner_plan(obs, &self.config, None))
    }
}

use crate::geometry::{Pose2D, Vec2};
use crate::llm::{build_waypoints_prompt, parse_waypoints_response, CompletionClient};

use super::{brake_fallback, Observation, PlanError, Planner, QueryRecord, TrajPoint, Trajectory, TRAJ_DT, TRAJ_SAMPLES};

/// Spacing of the waypoints in an answer, s.
pub const WAYPOINT_DT: f64 = 0.5;

/// Second derivatives of the natural cubic spline through equally spaced `y`.
fn natural_spline_moments(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior rows: m[i-1] + 4 m[i] + m[i+1] = rhs
    let k = n - 2;
    let mut c = vec![0.0; k];
    let mut d = vec![0.0; k];
    for i in 0..k {
        let rhs = 6.0 * (y[i + 2] - 2.0 * y[i + 1] + y[i]) / (h * h);
        let denom = 4.0 - if i > 0 { c[i - 1] } else { 0.0 };
        c[i] = 1.0 / denom;
        d[i] = (rhs - if i > 0 { d[i - 1] } else { 0.0 }) / denom;
    }
    for i in (0..k).rev() {
        m[i + 1] = d[i] - if i + 1 < k { c[i] * m[i + 2] } else { 0.0 };
    }
    m
}

fn spline_eval(y: &[f64], m: &[f64], h: f64, t: f64) -> f64 {
    let last = y.len() - 1;
    let i = ((t / h).floor() as usize).min(last - 1);
    let a = (i as f64 + 1.0) * h - t;
    let b = t - i as f64 * h;
    m[i] * a * a * a / (6.0 * h) + m[i + 1] * b * b * b / (6.0 * h) + (y[i] / h - m[i] * h / 6.0) * a
        + (y[i + 1] / h - m[i + 1] * h / 6.0) * b
}

/// Ego-frame waypoints at 0.5 s spacing to a world-frame trajectory at
/// 0.1 s, with the ego position prepended as the t = 0 knot.
pub fn interpolate_waypoints(ego: &Pose2D<f64>, waypoints: &[(f64, f64)]) -> Trajectory {
    let xs: Vec<f64> = std::iter::once(0.0).chain(waypoints.iter().map(|p| p.0)).collect();
    let ys: Vec<f64> = std::iter::once(0.0).chain(waypoints.iter().map(|p| p.1)).collect();
    let (mx, my) = (natural_spline_moments(&xs, WAYPOINT_DT), natural_spline_moments(&ys, WAYPOINT_DT));
    let end = WAYPOINT_DT * (xs.len() - 1) as f64;
    let n = ((end / TRAJ_DT).round() as usize + 1).min(TRAJ_SAMPLES);
    let pts: Vec<Vec2<f64>> = (0..n)
        .map(|k| {
            let t = k as f64 * TRAJ_DT;
            Vec2::new(spline_eval(&xs, &mx, WAYPOINT_DT, t), spline_eval(&ys, &my, WAYPOINT_DT, t))
        })
        .collect();
    let mut heading = 0.0;
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let (a, b) = (pts[k.saturating_sub(1)], pts[(k + 1).min(n - 1)]);
        let step = b - a;
        if step.norm() > 1e-6 {
            heading = step.angle();
        }
        let fwd = if k + 1 < n { pts[k + 1] - pts[k] } else { pts[k] - pts[k - 1] };
        let world = ego.to_world(pts[k]);
        samples.push(TrajPoint {
            t: k as f64 * TRAJ_DT,
            pose: Pose2D::new(world.x, world.y, ego.heading + heading),
            speed: fwd.norm() / TRAJ_DT,
        });
    }
    Trajectory { samples }
}

/// Planner that asks a language model for the trajectory itself.
pub struct WaypointsPlanner {
    client: Box<dyn CompletionClient>,
    records: Vec<QueryRecord>,
}

impl WaypointsPlanner {
    pub fn new(client: Box<dyn CompletionClient>) -> Self {
        Self { client, records: Vec::new() }
    }
}

fn request(obs: &Observation<'_>, client: &mut dyn CompletionClient) -> (QueryRecord, Result<Trajectory, PlanError>) {
    let prompt = build_waypoints_prompt(obs);
    let reply = client.complete(&prompt);
    let result = reply
        .clone()
        .map_err(|e| PlanError::Selector(e.to_string()))
        .and_then(|text| parse_waypoints_response(&text).map_err(|e| PlanError::Selector(e.to_string())))
        .map(|w| interpolate_waypoints(&obs.ego.bbox.center, &w));
    let record = QueryRecord {
        time: obs.time,
        system: prompt.task_instruction.clone(),
        user: prompt.user_message(),
        response: reply.ok(),
        error: result.as_ref().err().map(|e| e.to_string()),
        decision: None,
    };
    (record, result)
}

/// One query; any failure gives the brake fallback.
pub fn waypoints_llm_plan(obs: &Observation<'_>, client: &mut dyn CompletionClient) -> Trajectory {
    match request(obs, client).1.and_then(|t| t.validate().map(|_| t).map_err(PlanError::from)) {
        Ok(t) => t,
        Err(_) => brake_fallback(obs),
    }
}

impl Planner for WaypointsPlanner {
    fn name(&self) -> &str {
        "waypoints_llm"
    }

    fn plan(&mut self, obs: &Observation<'_>) -> Result<Trajectory, PlanError> {
        let (record, result) = request(obs, self.client.as_mut());
        self.records.push(record);
        result
    }

    fn take_queries(&mut self) -> Vec<QueryRecord> {
        std::mem::take(&mut self.records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_reproduces_a_line() {
        let w: Vec<(f64, f64)> = (1..=16).map(|i| (5.0 * i as f64, 0.0)).collect();
        let t = interpolate_waypoints(&Pose2D::new(0.0, 0.0, 0.0), &w);
        assert_eq!(t.samples.len(), 81);
        for (k, s) in t.samples.iter().enumerate() {
            assert!((s.pose.x - k as f64).abs() < 1e-9);
            assert!((s.speed - 10.0).abs() < 1e-9);
        }
    }

    #[test]
    fn spline_passes_through_knots() {
        // oracle: a smooth quadratic sampled at the knots
        let f = |t: f64| 0.3 * t * t;
        let w: Vec<(f64, f64)> = (1..=16).map(|i| (i as f64, f(0.5 * i as f64))).collect();
        let t = interpolate_waypoints(&Pose2D::new(0.0, 0.0, 0.0), &w);
        for i in 1..=16 {
            let s = t.samples[5 * i];
            assert!((s.pose.y - f(0.5 * i as f64)).abs() < 1e-9, "knot {i}");
        }
    }

    #[test]
    fn waypoints_are_rotated_into_world() {
        let w: Vec<(f64, f64)> = (1..=16).map(|i| (5.0 * i as f64, 0.0)).collect();
        let pose = Pose2D::new(10.0, 5.0, std::f64::consts::FRAC_PI_2);
        let t = interpolate_waypoints(&pose, &w);
        let last = t.samples.last().unwrap().pose;
        assert!((last.x - 10.0).abs() < 1e-9 && (last.y - 85.0).abs() < 1e-9);
        assert!((last.heading - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }
}

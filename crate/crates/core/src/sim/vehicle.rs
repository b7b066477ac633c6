use serde::{Deserialize, Serialize};

use crate::geometry::{OrientedBox, Pose2D, Vec2};
use crate::planners::Trajectory;

use super::SimConfig;

/// Steering angle bound, rad.
pub const MAX_STEER: f64 = 0.6;
pub const MAX_ACCEL: f64 = 4.0;
pub const MAX_BRAKE: f64 = -8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoState {
    #[serde(rename = "box")]
    pub bbox: OrientedBox<f64>,
    pub speed: f64,
    pub accel: f64,
    pub steering: f64,
}

impl EgoState {
    pub fn pose(&self) -> Pose2D<f64> {
        self.bbox.center
    }
}

/// Explicit Euler step of the kinematic bicycle: position first, then
/// heading, then speed. Commands are clamped to the actuator bounds.
pub fn kinematic_bicycle_step(s: &EgoState, steer_cmd: f64, accel_cmd: f64, cfg: &SimConfig, dt: f64) -> EgoState {
    let steer = if steer_cmd.is_finite() { steer_cmd.clamp(-MAX_STEER, MAX_STEER) } else { 0.0 };
    let accel = if accel_cmd.is_finite() { accel_cmd.clamp(MAX_BRAKE, MAX_ACCEL) } else { MAX_BRAKE };
    let p = s.bbox.center;
    let v = s.speed;
    let (sin, cos) = p.heading.sin_cos();
    let heading = p.heading + v / cfg.wheelbase * steer.tan() * dt;
    let speed = (v + accel * dt).max(0.0);
    EgoState {
        bbox: s.bbox.with_center(Pose2D::new(p.x + v * cos * dt, p.y + v * sin * dt, heading)),
        speed,
        accel: (speed - v) / dt,
        steering: steer,
    }
}

/// Pure pursuit on the trajectory path plus a proportional speed loop
/// toward the reference one step ahead. Returns `(steer, accel)`.
pub fn track_trajectory(traj: &Trajectory, ego: &EgoState, cfg: &SimConfig) -> (f64, f64) {
    let samples = &traj.samples;
    let pose = ego.bbox.center;
    let here = pose.position();
    let span = samples.iter().map(|s| s.pose.position().dist(samples[0].pose.position())).fold(0.0, f64::max);
    if samples.len() < 2 || span < 1e-6 && samples.iter().all(|s| s.speed < 1e-6) {
        return (0.0, MAX_BRAKE);
    }
    let v_ref = traj.at(cfg.dt).speed;
    let accel = cfg.speed_gain * (v_ref - ego.speed);

    let lookahead = cfg.lookahead_min.max(cfg.lookahead_time * ego.speed);
    let nearest = (0..samples.len())
        .min_by(|&a, &b| {
            let da = samples[a].pose.position().dist(here);
            let db = samples[b].pose.position().dist(here);
            da.total_cmp(&db)
        })
        .expect("non-empty");
    let mut remaining = lookahead;
    let mut target: Option<Vec2<f64>> = None;
    for i in nearest..samples.len() - 1 {
        let (a, b) = (samples[i].pose.position(), samples[i + 1].pose.position());
        let seg = a.dist(b);
        if seg >= remaining && seg > 0.0 {
            target = Some(a + (b - a) * (remaining / seg));
            break;
        }
        remaining -= seg;
    }
    let target = target.unwrap_or_else(|| {
        let last = samples[samples.len() - 1].pose;
        last.position() + last.direction() * remaining.max(0.0)
    });
    let local = pose.to_local(target);
    let ld = local.norm();
    if ld < 1e-6 {
        return (0.0, accel);
    }
    let alpha = local.y.atan2(local.x);
    let steer = (2.0 * cfg.wheelbase * alpha.sin() / ld).atan();
    (steer, accel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planners::{TrajPoint, TRAJ_DT};
    use crate::scenario::{EGO_LENGTH, EGO_WIDTH};

    fn ego(x: f64, y: f64, heading: f64, speed: f64) -> EgoState {
        EgoState {
            bbox: OrientedBox::new(Pose2D::new(x, y, heading), EGO_LENGTH, EGO_WIDTH),
            speed,
            accel: 0.0,
            steering: 0.0,
        }
    }

    fn straight(x0: f64, v: f64) -> Trajectory {
        Trajectory {
            samples: (0..81)
                .map(|k| {
                    let t = k as f64 * TRAJ_DT;
                    TrajPoint { t, pose: Pose2D::new(x0 + v * t, 0.0, 0.0), speed: v }
                })
                .collect(),
        }
    }

    #[test]
    fn zero_commands_go_straight() {
        let cfg = SimConfig::default();
        let mut s = ego(0.0, 0.0, 0.3, 10.0);
        for _ in 0..50 {
            s = kinematic_bicycle_step(&s, 0.0, 0.0, &cfg, 0.1);
        }
        let p = s.pose();
        assert!((p.x - 50.0 * 0.3f64.cos()).abs() < 1e-9 && (p.y - 50.0 * 0.3f64.sin()).abs() < 1e-9);
        assert_eq!(s.speed, 10.0);
    }

    #[test]
    fn constant_steer_traces_the_turning_circle() {
        let cfg = SimConfig::default();
        let delta: f64 = 0.3;
        let radius = cfg.wheelbase / delta.tan();
        let dt = 0.01;
        let v = 5.0;
        let steps = (2.0 * std::f64::consts::PI * radius / (v * dt)).ceil() as usize;
        let mut s = ego(0.0, 0.0, 0.0, v);
        let mut pts = vec![s.pose().position()];
        for _ in 0..steps {
            s = kinematic_bicycle_step(&s, delta, 0.0, &cfg, dt);
            pts.push(s.pose().position());
        }
        let n = pts.len() as f64;
        let c = pts.iter().fold(Vec2::new(0.0, 0.0), |a, &p| a + p) * (1.0 / n);
        let mean_r = pts.iter().map(|p| p.dist(c)).sum::<f64>() / n;
        assert!((mean_r / radius - 1.0).abs() < 0.01, "{mean_r} vs {radius}");
    }

    #[test]
    fn euler_is_first_order() {
        let cfg = SimConfig::default();
        let run = |dt: f64| {
            let mut s = ego(0.0, 0.0, 0.0, 8.0);
            for _ in 0..(4.0 / dt).round() as usize {
                s = kinematic_bicycle_step(&s, 0.2, 1.0, &cfg, dt);
            }
            s.pose().position()
        };
        let (a, b, c) = (run(0.02), run(0.01), run(0.005));
        let ratio = a.dist(b) / b.dist(c);
        assert!((1.8..=2.2).contains(&ratio), "{ratio}");
    }

    #[test]
    fn commands_are_clamped() {
        let cfg = SimConfig::default();
        let s = kinematic_bicycle_step(&ego(0.0, 0.0, 0.0, 1.0), 2.0, -50.0, &cfg, 0.1);
        assert_eq!(s.steering, MAX_STEER);
        assert!((s.speed - 0.2).abs() < 1e-12, "{}", s.speed);
        let s = kinematic_bicycle_step(&ego(0.0, 0.0, 0.0, 0.1), 0.0, -8.0, &cfg, 0.1);
        assert_eq!(s.speed, 0.0);
    }

    #[test]
    fn on_reference_no_correction() {
        let cfg = SimConfig::default();
        let (steer, accel) = track_trajectory(&straight(0.0, 10.0), &ego(0.0, 0.0, 0.0, 10.0), &cfg);
        assert!(steer.abs() < 1e-3 && accel.abs() < 1e-3);
    }

    #[test]
    fn left_offset_steers_right() {
        let cfg = SimConfig::default();
        let (steer, _) = track_trajectory(&straight(0.0, 10.0), &ego(0.0, 0.5, 0.0, 10.0), &cfg);
        assert!(steer < 0.0);
    }

    #[test]
    fn settles_onto_straight_reference() {
        let cfg = SimConfig::default();
        let mut s = ego(0.0, 0.5, 0.0, 10.0);
        for _ in 0..200 {
            let t = straight(s.pose().x, 10.0);
            let (steer, accel) = track_trajectory(&t, &s, &cfg);
            s = kinematic_bicycle_step(&s, steer, accel, &cfg, cfg.dt);
        }
        assert!(s.pose().y.abs() < 0.1, "{}", s.pose().y);
    }

    #[test]
    fn degenerate_trajectory_brakes() {
        let cfg = SimConfig::default();
        let t = Trajectory {
            samples: (0..81).map(|k| TrajPoint { t: k as f64 * 0.1, pose: Pose2D::new(1.0, 1.0, 0.0), speed: 0.0 }).collect(),
        };
        assert_eq!(track_trajectory(&t, &ego(1.0, 1.0, 0.0, 3.0), &cfg), (0.0, MAX_BRAKE));
    }
}

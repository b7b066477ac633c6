//! Benchmark acceptance checks. Each criterion prints one PASS/FAIL line
//! (written straight to stderr so it shows up without `--nocapture`); the
//! test fails if any criterion fails.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tailbench::{reference_table, run_many, PlannerSpec, ScenarioRun};
use tailbench_core::agents::{idm_acceleration, AgentPolicy, IdmParams, PedestrianPhase};
use tailbench_core::geometry::{boxes_collide, fraction_outside_drivable_grid, OrientedBox, Pose2D, Vec2};
use tailbench_core::llm::{LlmSelector, MockClient};
use tailbench_core::map::{shortest_route, LaneGraph, LaneId, Route};
use tailbench_core::metrics::{
    aggregate_score, scores_to_csv, suite_report, weighted_average, Components, MetricConfig, Multipliers, ScenarioScore,
};
use tailbench_core::planners::{
    evaluate_candidates, sampling_planner_plan, AgentObs, EgoObs, HybridPlanner, Observation, PedestrianObs, Planner,
    SamplingConfig, SamplingPlanner, TrajPoint, Trajectory, WaypointsPlanner, TRAJ_DT,
};
use tailbench_core::scenario::{
    build_map, generate_benchmark_suite, scripted_crossing, MapKind, MapParams, ObstacleKind, ObstacleSpec,
    ScenarioSpec, ScenarioType, CAR_LENGTH, CAR_WIDTH, EGO_LENGTH, EGO_WIDTH, SCRIPTED_DURATION,
};
use tailbench_core::sim::{kinematic_bicycle_step, run_closed_loop, track_trajectory, EgoState, EventKind, SimConfig};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn of_type(runs: &[ScenarioRun], kinds: &[ScenarioType]) -> Vec<ScenarioScore> {
    runs.iter().filter(|r| kinds.contains(&r.spec.kind)).map(|r| r.score.clone()).collect()
}

fn mean_score(runs: &[ScenarioRun], kind: ScenarioType) -> f64 {
    let s = of_type(runs, &[kind]);
    s.iter().map(|x| x.score).sum::<f64>() / s.len() as f64
}

const LC_TYPES: [ScenarioType; 3] = [ScenarioType::LaneChangeLtd, ScenarioType::LaneChangeMtd, ScenarioType::LaneChangeHtd];
const BLOCKED_TYPES: [ScenarioType; 3] = [ScenarioType::Construction, ScenarioType::Accident, ScenarioType::Overtake];

struct Suite {
    specs: Vec<ScenarioSpec>,
    references: BTreeMap<String, f64>,
    runs: BTreeMap<&'static str, Vec<ScenarioRun>>,
    seconds: BTreeMap<&'static str, f64>,
}

impl Suite {
    fn run(planners: &[&'static str]) -> Self {
        let specs = generate_benchmark_suite(0);
        let dir = tempfile::tempdir().unwrap();
        let references = reference_table(&specs, &dir.path().join("ref.json"), 1).unwrap();
        let mut runs = BTreeMap::new();
        let mut seconds = BTreeMap::new();
        for &p in planners {
            let t = Instant::now();
            let r = run_many(&specs, &PlannerSpec::new(p), &MetricConfig::default(), &references, 1).unwrap();
            seconds.insert(p, t.elapsed().as_secs_f64());
            runs.insert(p, r);
        }
        Self { specs, references, runs, seconds }
    }
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let suite = generate_benchmark_suite(0);
    let elapsed = t.elapsed().as_secs_f64();
    let per_type_ok = ScenarioType::ALL.iter().all(|k| suite.iter().filter(|s| s.kind == *k).count() == 10);
    let mut splits = Vec::new();
    for kind in LC_TYPES {
        let subset: Vec<_> = suite.iter().filter(|s| s.kind == kind).collect();
        let all = |s: &ScenarioSpec, p| !s.agents.vehicles.is_empty() && s.agents.vehicles.iter().all(|a| a.policy == p);
        let cons = subset.iter().filter(|s| all(s, AgentPolicy::Conservative)).count();
        let asrt = subset.iter().filter(|s| all(s, AgentPolicy::Assertive)).count();
        splits.push((cons, asrt, subset.len() - cons - asrt));
    }
    check(
        suite.len() == 80 && per_type_ok && splits.iter().all(|s| *s == (3, 3, 4)) && elapsed < 5.0,
        format!("{} scenarios, 10 per type: {per_type_ok}, LTD/MTD/HTD splits {splits:?}, {elapsed:.2} s", suite.len()),
    )
}

fn criterion_2(suite: &Suite) -> Outcome {
    let specs: Vec<ScenarioSpec> = suite.specs.iter().filter(|s| BLOCKED_TYPES.contains(&s.kind)).cloned().collect();
    let t = Instant::now();
    let runs = run_many(&specs, &PlannerSpec::new("idm"), &MetricConfig::default(), &suite.references, 1).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    let zeros = runs.iter().filter(|r| r.score.score == 0.0 && r.score.multipliers.min_progress == 0.0).count();
    check(
        runs.len() == 30 && zeros == 30 && elapsed < 60.0,
        format!("IDM zero on {zeros}/{} Constr./Acc./Overt. scenarios via min_progress, {elapsed:.1} s", runs.len()),
    )
}

fn criterion_3(suite: &Suite) -> Outcome {
    let idm = suite_report("idm", &of_type(&suite.runs["idm"], &LC_TYPES));
    let mobil = suite_report("idm_mobil", &of_type(&suite.runs["idm_mobil"], &LC_TYPES));
    check(
        idm.scenarios == 30 && idm.goal == Some(0.0) && idm.no_collision == Some(1.0) && mobil.goal.unwrap_or(0.0) > 0.0,
        format!(
            "IDM Goal {:?} No-Col. {:?}; IDM+MOBIL Goal {:?}",
            idm.goal.map(|g| g * 100.0),
            idm.no_collision.map(|g| g * 100.0),
            mobil.goal.map(|g| g * 100.0)
        ),
    )
}

fn criterion_4(suite: &Suite) -> Outcome {
    let nudge = of_type(&suite.runs["sampling"], &[ScenarioType::Nudge]);
    let passed = nudge.iter().filter(|s| s.multipliers.min_progress == 1.0).count();
    check(passed >= 7, format!("sampling planner passes the obstacle in {passed}/{} Nudge scenarios", nudge.len()))
}

/// Seconds from the crossing start to the first hard braking (<= -3 m/s^2).
fn crossing_response(speed: f64, walk: f64, window: f64) -> (usize, Option<f64>) {
    let spec = scripted_crossing(speed, walk, 2.5).unwrap();
    let cfg = SamplingConfig { window, ..SamplingConfig::default() };
    let sim = SimConfig { duration: SCRIPTED_DURATION, ..SimConfig::default() };
    let trace = run_closed_loop(&spec, &mut SamplingPlanner::new(cfg), &sim);
    let collisions = trace.events.iter().filter(|e| matches!(e.kind, EventKind::Collision { .. })).count();
    let start = trace
        .snapshots
        .iter()
        .position(|s| s.pedestrians[0].phase != PedestrianPhase::Waiting)
        .expect("crossing starts");
    let onset = trace.snapshots[start..].iter().position(|s| s.ego.accel <= -3.0).map(|i| i as f64 * sim.dt);
    (collisions, onset)
}

fn criterion_5() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (v, walk) in [(14.0, 1.5), (12.0, 1.5), (14.0, 1.2), (16.0, 1.5)] {
        let (c2, on2) = crossing_response(v, walk, 2.0);
        let (c4, on4) = crossing_response(v, walk, 4.0);
        let safe_long = c4 == 0 && on4.map_or(false, |t| t <= 0.2 + 1e-9);
        let late_short = c2 > 0 || match (on2, on4) {
            (Some(a), Some(b)) => a >= b + 0.3 - 1e-9,
            (None, _) => true,
            _ => false,
        };
        ok &= safe_long && late_short;
        let fmt = |o: Option<f64>| o.map_or("none".to_owned(), |t| format!("{t:.1}s"));
        parts.push(format!("{v}m/s walk {walk}: 2.0s window {c2} col, brake {}; 4.0s window {c4} col, brake {}", fmt(on2), fmt(on4)));
    }
    check(ok, parts.join("; "))
}

fn criterion_6(suite: &Suite) -> Outcome {
    let hybrid = &suite.runs["hybrid"];
    let sampling = &suite.runs["sampling"];
    // instances 0, 3, 6, 9 have no oncoming traffic
    let quiet = hybrid.iter().find(|r| r.spec.name == "overtake_00").expect("overtake_00");
    let no_oncoming = quiet.spec.agents.vehicles.is_empty();
    let m = quiet.score.multipliers;
    let passes = m.min_progress == 1.0 && m.product() == 1.0;
    let (hc, sc) = (mean_score(hybrid, ScenarioType::Construction), mean_score(sampling, ScenarioType::Construction));
    let (ha, sa) = (mean_score(hybrid, ScenarioType::Accident), mean_score(sampling, ScenarioType::Accident));
    check(
        no_oncoming && passes && hc > sc && ha > sa,
        format!(
            "overtake_00 multipliers {:.0}; Constr. hybrid {:.0} vs sampling {:.0}; Acc. hybrid {:.0} vs sampling {:.0}",
            m.product(),
            hc * 100.0,
            sc * 100.0,
            ha * 100.0,
            sa * 100.0
        ),
    )
}

fn criterion_7() -> Outcome {
    let cfg = MetricConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut gated = true;
    let mut exempt = true;
    for i in 0..20 {
        let kind = ScenarioType::ALL[i % 8];
        let c = Components {
            progress: rng.gen(),
            ttc: rng.gen(),
            speed_limit: rng.gen(),
            comfort: rng.gen(),
            lane_change_completion: rng.gen(),
        };
        // by hand: 5/5/4/2, plus 5 on lane-change completion for lane-change types
        let hand = if kind.is_lane_change() {
            (5.0 * c.progress + 5.0 * c.ttc + 4.0 * c.speed_limit + 2.0 * c.comfort + 5.0 * c.lane_change_completion) / 21.0
        } else {
            (5.0 * c.progress + 5.0 * c.ttc + 4.0 * c.speed_limit + 2.0 * c.comfort) / 16.0
        };
        worst = worst.max((weighted_average(&c, &cfg.weights, kind) - hand).abs());
        let ones = Multipliers { collision: 1.0, drivable: 1.0, direction: 1.0, stationary: 1.0, min_progress: 1.0 };
        worst = worst.max((aggregate_score(&c, &ones, &cfg, kind) - hand).abs());
        let half = Multipliers { direction: 0.5, ..ones };
        let expect = if kind.oncoming_pass_expected() { hand } else { 0.5 * hand };
        worst = worst.max((aggregate_score(&c, &half, &cfg, kind) - expect).abs());
        for k in 0..5 {
            let mut m = ones;
            *[&mut m.collision, &mut m.drivable, &mut m.direction, &mut m.stationary, &mut m.min_progress][k] = 0.0;
            let s = aggregate_score(&c, &m, &cfg, kind);
            if k == 2 && kind.oncoming_pass_expected() {
                exempt &= (s - hand).abs() < 1e-12;
            } else {
                gated &= s == 0.0;
            }
        }
    }
    check(
        worst < 1e-12 && gated && exempt,
        format!("20 vectors, max |error| {worst:.1e}; zero gate exact: {gated}; direction exemption: {exempt}"),
    )
}

/// Point-sampling contact oracle: boundary points of each box tested
/// against the other, plus the centers.
fn sampled_contact(a: &OrientedBox<f64>, b: &OrientedBox<f64>, step: f64) -> bool {
    let boundary_hits = |p: &OrientedBox<f64>, q: &OrientedBox<f64>| {
        let c = p.corners();
        (0..4).any(|i| {
            let (u, v) = (c[i], c[(i + 1) % 4]);
            let n = (u.dist(v) / step).ceil().max(1.0) as usize;
            (0..=n).any(|k| q.contains(u + (v - u) * (k as f64 / n as f64)))
        })
    };
    a.contains(b.center.position()) || b.contains(a.center.position()) || boundary_hits(a, b) || boundary_hits(b, a)
}

fn grown(b: &OrientedBox<f64>, by: f64) -> OrientedBox<f64> {
    OrientedBox::new(b.center, b.length + 2.0 * by, b.width + 2.0 * by)
}

fn criterion_8() -> Outcome {
    const BAND: f64 = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut disagreements = 0;
    let mut contacts = 0;
    for _ in 0..10_000 {
        let mut rbox = |r: f64| {
            let p = Pose2D::new(rng.gen_range(-r..r), rng.gen_range(-r..r), rng.gen_range(-3.2..3.2));
            OrientedBox::new(p, rng.gen_range(0.2..6.0), rng.gen_range(0.2..3.0))
        };
        let (a, b) = (rbox(0.5), rbox(5.0));
        let sat = boxes_collide(&a, &b);
        contacts += usize::from(sat);
        if sat != sampled_contact(&a, &b, 2e-4) {
            // only allowed when the answer flips within the tangency band
            let near = sampled_contact(&grown(&a, BAND), &b, 2e-4) && !sampled_contact(&grown(&a, -BAND), &b, 2e-4);
            if !near {
                disagreements += 1;
            }
        }
    }
    let argmin = argmin_agreement(100);
    check(
        disagreements == 0 && argmin.0 == 100,
        format!(
            "SAT vs sampling: {disagreements} disagreements beyond {BAND} m in 10^4 pairs ({contacts} contacts); \
             selected = exhaustive argmin on {}/100 observations ({} fully blocked)",
            argmin.0, argmin.1
        ),
    )
}

fn route_to(g: &LaneGraph, lane: &str, len: f64) -> Route {
    let l = g.lane(&LaneId::from(lane)).unwrap();
    let (p, t) = l.centerline.sample(len - 20.0);
    shortest_route(g, &LaneId::from(lane), &LaneId::from(lane), Pose2D::new(p.x, p.y, t.angle())).unwrap()
}

fn random_observation<'a>(rng: &mut ChaCha8Rng, g: &'a LaneGraph, r: &'a Route) -> Observation<'a> {
    let x = rng.gen_range(40.0..120.0);
    let ego = EgoObs {
        bbox: OrientedBox::new(Pose2D::new(x, rng.gen_range(-0.6..0.6), rng.gen_range(-0.05..0.05)), EGO_LENGTH, EGO_WIDTH),
        speed: rng.gen_range(0.0..13.0),
        accel: 0.0,
    };
    let mut o = Observation { ego, agents: vec![], pedestrians: vec![], obstacles: vec![], graph: g, route: r, time: 0.0 };
    for id in 0..rng.gen_range(0..6) {
        let oncoming = rng.gen_bool(0.4);
        let (y, v) = if oncoming { (3.5, -rng.gen_range(0.0..13.0)) } else { (rng.gen_range(-0.3..0.3), rng.gen_range(0.0..13.0)) };
        let ax = x + rng.gen_range(-40.0..80.0);
        if (ax - x).abs() < 6.0 && !oncoming {
            continue;
        }
        let heading = if v < 0.0 { std::f64::consts::PI } else { 0.0 };
        o.agents.push(AgentObs {
            id,
            bbox: OrientedBox::new(Pose2D::new(ax, y, heading), CAR_LENGTH, CAR_WIDTH),
            speed: f64::abs(v),
            lane: (if oncoming { "O0" } else { "L0" }).into(),
            velocity: Vec2::new(v, 0.0),
        });
    }
    for _ in 0..rng.gen_range(0..3) {
        let p = Pose2D::new(x + rng.gen_range(8.0..60.0), rng.gen_range(-1.5..1.5), 0.0);
        o.obstacles.push(ObstacleSpec { kind: ObstacleKind::Cone, bbox: OrientedBox::new(p, 0.5, 0.5), lane: "L0".into() });
    }
    for id in 0..rng.gen_range(0..2) {
        let position = Vec2::new(x + rng.gen_range(5.0..40.0), rng.gen_range(-3.0..0.0));
        o.pedestrians.push(PedestrianObs { id: 100 + id, position, velocity: Vec2::new(0.0, rng.gen_range(0.0..1.6)) });
    }
    o
}

/// Candidate feasibility, TTC and comfort fractions recomputed from the raw
/// observation.
fn oracle_terms(o: &Observation<'_>, t: &Trajectory, window: f64) -> (bool, f64, f64) {
    let steps = (window / TRAJ_DT).round() as usize;
    let moved = |b: OrientedBox<f64>, v: Vec2<f64>, dt: f64| {
        let c = b.center;
        b.with_center(Pose2D::new(c.x + v.x * dt, c.y + v.y * dt, c.heading))
    };
    // (box, kind) with kind 0 = vehicle, 1 = pedestrian, 2 = static
    let actors_at = |time: f64| {
        let mut v: Vec<(OrientedBox<f64>, u8)> = Vec::new();
        v.extend(o.agents.iter().map(|a| (moved(a.bbox, a.velocity, time), 0)));
        v.extend(o.pedestrians.iter().map(|p| (PedestrianObs { position: p.position + p.velocity * time, ..*p }.bbox(), 1)));
        v.extend(o.obstacles.iter().map(|x| (x.bbox, 2)));
        v
    };
    let mut infeasible = false;
    let (mut ttc, mut comfort) = (0, 0);
    for k in 0..=steps {
        let s: TrajPoint = t.samples[k];
        let ego = OrientedBox::new(s.pose, EGO_LENGTH, EGO_WIDTH);
        let front = ego.half(true);
        infeasible |= actors_at(s.t).iter().any(|(b, kind)| match kind {
            0 => boxes_collide(&front, b),
            1 => boxes_collide(&ego, &grown(b, 0.5)),
            _ => boxes_collide(&ego, b),
        });
        infeasible |= fraction_outside_drivable_grid(&ego, o.graph.drivable_area(), 8) > 0.05;
        if s.speed >= 0.1 {
            let hit = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95].iter().any(|&tau| {
                let ahead = front.with_center(front.center.offset(s.speed * tau, 0.0));
                actors_at(s.t + tau).iter().any(|(b, _)| boxes_collide(&ahead, b))
            });
            ttc += usize::from(hit);
        }
        if k < steps {
            let n = t.samples[k + 1];
            let lon = (n.speed - s.speed) / TRAJ_DT;
            let ds = s.pose.position().dist(n.pose.position());
            let lat = if ds < 1e-6 {
                0.0
            } else {
                let v = 0.5 * (s.speed + n.speed);
                let dh = (n.pose.heading - s.pose.heading + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI)
                    - std::f64::consts::PI;
                v * v * dh.abs() / ds
            };
            comfort += usize::from(!(-4.05..=2.40).contains(&lon) || lat > 4.89);
        }
    }
    (infeasible, ttc as f64 / (steps + 1) as f64, comfort as f64 / steps as f64)
}

/// Returns (agreements, observations with every candidate infeasible).
fn argmin_agreement(n: usize) -> (usize, usize) {
    let g = build_map(&MapParams::new(MapKind::TwoWay, 1, 3.5, 400.0)).unwrap();
    let r = route_to(&g, "L0", 400.0);
    let cfg = SamplingConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut agree, mut blocked) = (0, 0);
    for _ in 0..n {
        let o = random_observation(&mut rng, &g, &r);
        let evals = evaluate_candidates(&o, &cfg, None);
        let terms: Vec<_> = evals.iter().map(|c| oracle_terms(&o, &c.trajectory, cfg.window)).collect();
        let best_progress =
            evals.iter().zip(&terms).filter(|(_, t)| !t.0).map(|(c, _)| c.progress).fold(0.0, f64::max);
        let w = cfg.weights;
        let mut best: Option<(f64, f64, f64, usize)> = None;
        for (i, (c, t)) in evals.iter().zip(&terms).enumerate() {
            if t.0 {
                continue;
            }
            let loss = if best_progress > 1e-9 { 1.0 - c.progress / best_progress } else { 0.0 };
            let cost = w.progress * loss + w.ttc * t.1 + w.lateral * c.delta.abs() + w.comfort * t.2;
            let key = (cost, c.delta.abs(), -c.progress, i);
            if best.map_or(true, |b| (key.0, key.1, key.2) < (b.0, b.1, b.2)) {
                best = Some(key);
            }
        }
        let plan = sampling_planner_plan(&o, &cfg, None);
        let ok = match best {
            Some((.., i)) => evals.len() == 30 && plan == evals[i].trajectory,
            None => {
                blocked += 1;
                plan.samples.last().map_or(false, |s| s.speed == 0.0)
            }
        };
        agree += usize::from(ok);
    }
    (agree, blocked)
}

fn criterion_9() -> Outcome {
    // two-car IDM: a fast-desiring follower settles behind a 10 m/s lead
    let p = IdmParams { desired_speed: 40.0, ..IdmParams::with_desired_speed(40.0) };
    let (v_lead, dt) = (10.0, 0.05);
    let (mut gap, mut v) = (60.0, 10.0);
    for _ in 0..(60.0 / dt) as usize {
        let a = idm_acceleration(v, Some((v_lead, gap)), &p).unwrap();
        let nv = (v + a * dt).max(0.0);
        gap += (v_lead - 0.5 * (v + nv)) * dt;
        v = nv;
    }
    let target = p.jam_distance + v_lead * p.time_headway;
    let gap_err = (gap / target - 1.0).abs();

    let cfg = SimConfig::default();
    let ego = |x: f64, y: f64, speed: f64| EgoState {
        bbox: OrientedBox::new(Pose2D::new(x, y, 0.0), EGO_LENGTH, EGO_WIDTH),
        speed,
        accel: 0.0,
        steering: 0.0,
    };
    // turning radius
    let delta: f64 = 0.3;
    let radius = cfg.wheelbase / delta.tan();
    let mut s = ego(0.0, 0.0, 5.0);
    let mut pts = vec![s.bbox.center.position()];
    let step = 0.01;
    for _ in 0..(2.0 * std::f64::consts::PI * radius / (5.0 * step)).ceil() as usize {
        s = kinematic_bicycle_step(&s, delta, 0.0, &cfg, step);
        pts.push(s.bbox.center.position());
    }
    let c = pts.iter().fold(Vec2::new(0.0, 0.0), |a, &p| a + p) * (1.0 / pts.len() as f64);
    let fitted = pts.iter().map(|p| p.dist(c)).sum::<f64>() / pts.len() as f64;
    let radius_err = (fitted / radius - 1.0).abs();

    // dt-halving convergence
    let end = |h: f64| {
        let mut s = ego(0.0, 0.0, 8.0);
        for _ in 0..(4.0 / h).round() as usize {
            s = kinematic_bicycle_step(&s, 0.2, 1.0, &cfg, h);
        }
        s.bbox.center.position()
    };
    let (a, b, c3) = (end(0.02), end(0.01), end(0.005));
    let ratio = a.dist(b) / b.dist(c3);

    // cross-track after settling on a straight reference
    let mut s = ego(0.0, 0.5, 10.0);
    let mut worst: f64 = 0.0;
    for k in 0..300 {
        let x0 = s.bbox.center.x;
        let reference = Trajectory {
            samples: (0..81)
                .map(|i| {
                    let t = i as f64 * TRAJ_DT;
                    TrajPoint { t, pose: Pose2D::new(x0 + 10.0 * t, 0.0, 0.0), speed: 10.0 }
                })
                .collect(),
        };
        let (steer, accel) = track_trajectory(&reference, &s, &cfg);
        s = kinematic_bicycle_step(&s, steer, accel, &cfg, cfg.dt);
        if k >= 100 {
            worst = worst.max(s.bbox.center.y.abs());
        }
    }
    check(
        gap_err < 0.01 && radius_err < 0.01 && (1.8..=2.2).contains(&ratio) && worst < 0.1,
        format!(
            "IDM gap {gap:.3} m vs s0+vT {target:.3} m ({:.2}%); radius error {:.3}%; dt ratio {ratio:.3}; cross-track {worst:.4} m",
            gap_err * 100.0,
            radius_err * 100.0
        ),
    )
}

fn criterion_10(suite: &Suite) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for p in ["idm", "hybrid"] {
        let serial = &suite.runs[p];
        let parallel = run_many(&suite.specs, &PlannerSpec::new(p), &MetricConfig::default(), &suite.references, 8).unwrap();
        let hashes = |r: &[ScenarioRun]| r.iter().map(|x| x.trace.hash()).collect::<Vec<_>>();
        let csv = |r: &[ScenarioRun]| scores_to_csv(&r.iter().map(|x| x.score.clone()).collect::<Vec<_>>());
        let same = hashes(serial) == hashes(&parallel) && csv(serial) == csv(&parallel);
        ok &= same;
        parts.push(format!("{p}: serial vs 8 threads identical {same}"));
    }
    let slowest = suite.seconds.iter().max_by(|a, b| a.1.total_cmp(b.1)).map(|(p, s)| (*p, *s)).unwrap();
    ok &= slowest.1 < 300.0;
    parts.push(format!(
        "slowest rule-based suite {} {:.1} s on one thread ({})",
        slowest.0,
        slowest.1,
        suite.seconds.iter().map(|(p, s)| format!("{p} {s:.1}s")).collect::<Vec<_>>().join(", ")
    ));
    check(ok, parts.join("; "))
}

fn criterion_11(suite: &Suite) -> Outcome {
    let env_free = ["LLM_ENDPOINT", "LLM_MODEL", "LLM_API_KEY"].iter().all(|k| std::env::var_os(k).is_none());
    let llm_rejected = !env_free || PlannerSpec::new("waypoints_llm").validate().is_err();
    let spec = suite.specs.iter().find(|s| s.name == "overtake_00").unwrap();
    let sim = SimConfig { duration: spec.duration, ..SimConfig::default() };
    let selector = LlmSelector::new(Box::new(MockClient::fixed("Blocked ahead, nothing coming. overtake obstacle")));
    let mut hybrid = HybridPlanner::new(Box::new(selector), SamplingConfig::default());
    let h = run_closed_loop(spec, &mut hybrid, &sim);
    let body: Vec<String> = (1..=16).map(|i| format!("({:.1}, 0.0)", 4.0 * i as f64)).collect();
    let mut waypoints = WaypointsPlanner::new(Box::new(MockClient::fixed(format!("[{}]", body.join(", ")))));
    let w = run_closed_loop(spec, &mut waypoints as &mut dyn Planner, &sim);
    let fallbacks = |t: &tailbench_core::sim::SimTrace| t.events.iter().filter(|e| matches!(e.kind, EventKind::PlannerFallback { .. })).count();
    let oracle_runs = suite.runs["hybrid"].len();
    check(
        llm_rejected && !h.queries.is_empty() && !w.queries.is_empty() && fallbacks(&h) == 0 && fallbacks(&w) == 0,
        format!(
            "hybrid suite with scripted oracle {oracle_runs} scenarios; mock hybrid {} queries, mock waypoints {} queries, \
             0 fallbacks; LLM planner refused without endpoint: {llm_rejected}",
            h.queries.len(),
            w.queries.len()
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let suite = Suite::run(&["idm", "idm_mobil", "sampling", "hybrid"]);
    let results: Vec<(usize, Outcome)> = vec![
        (1, criterion_1()),
        (2, criterion_2(&suite)),
        (3, criterion_3(&suite)),
        (4, criterion_4(&suite)),
        (5, criterion_5()),
        (6, criterion_6(&suite)),
        (7, criterion_7()),
        (8, criterion_8()),
        (9, criterion_9()),
        (10, criterion_10(&suite)),
        (11, criterion_11(&suite)),
    ];
    let mut err = std::io::stderr().lock();
    for (n, r) in &results {
        let (tag, detail) = match r {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        writeln!(err, "criterion {n:>2}: {tag} | {detail}").unwrap();
    }
    let failed: Vec<usize> = results.iter().filter(|(_, r)| r.is_err()).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

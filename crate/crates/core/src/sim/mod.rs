//! Fixed-step closed-loop simulation of the ego, traffic and pedestrians.

mod collision;
mod trace;
mod vehicle;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::agents::{step_pedestrian, step_vehicle_agent, AgentState, EgoView, PedestrianState, World};
use crate::geometry::{boxes_collide, fraction_outside_drivable};
use crate::map::{LaneGraph, Route};
use crate::planners::{plan_with_fallback, AgentObs, EgoObs, Observation, PedestrianObs, Planner, Trajectory};
use crate::scenario::{ObstacleSpec, ScenarioSpec};

pub use collision::{actors_at, ego_at_fault, ego_contacts, ActorRef, ContactActor};
pub use trace::{
    AgentSnapshot, EventKind, PedestrianSnapshot, SimEvent, SimTrace, Snapshot, TraceIoError, TRACE_VERSION,
};
pub use vehicle::{kinematic_bicycle_step, track_trajectory, EgoState, MAX_ACCEL, MAX_BRAKE, MAX_STEER};

/// Below this speed the ego counts as stopped, m/s.
pub const EGO_STOPPED: f64 = 0.1;
/// Fraction of the footprint allowed outside the drivable area.
pub const AREA_TOLERANCE: f64 = 0.05;
/// Every n-th plan sample is kept in the trace (0.5 s).
const PLAN_STRIDE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub duration: f64,
    pub wheelbase: f64,
    /// Pure-pursuit lookahead is `max(lookahead_min, lookahead_time * v)`.
    pub lookahead_min: f64,
    pub lookahead_time: f64,
    /// Proportional speed gain, 1/s.
    pub speed_gain: f64,
    /// Actors farther than this from the ego are not observed, m.
    pub observation_radius: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            duration: 15.0,
            wheelbase: 3.1,
            lookahead_min: 4.0,
            lookahead_time: 0.5,
            speed_gain: 10.0,
            observation_radius: 100.0,
        }
    }
}

impl SimConfig {
    pub fn ticks(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

/// Mutable simulation state of one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub ego: EgoState,
    pub agents: Vec<AgentState>,
    pub pedestrians: Vec<PedestrianState>,
}

impl WorldState {
    pub fn initial(spec: &ScenarioSpec) -> Self {
        Self {
            ego: EgoState { bbox: spec.ego.bbox(), speed: spec.ego.speed, accel: 0.0, steering: 0.0 },
            agents: spec.agents.vehicles.clone(),
            pedestrians: spec.agents.pedestrians.clone(),
        }
    }
}

/// Noise-free observation of every actor within the radius.
pub fn build_observation<'a>(
    state: &WorldState,
    obstacles: &[ObstacleSpec],
    graph: &'a LaneGraph,
    route: &'a Route,
    t: f64,
    radius: f64,
) -> Observation<'a> {
    let ego = state.ego.bbox.center.position();
    let near = |b: &crate::geometry::OrientedBox<f64>| b.center.position().dist(ego) <= radius;
    let agents = state
        .agents
        .iter()
        .filter(|a| a.active)
        .map(|a| (a, a.bbox(graph)))
        .filter(|(_, b)| near(b))
        .map(|(a, b)| AgentObs { id: a.id, bbox: b, speed: a.speed, lane: a.lane.clone(), velocity: a.velocity(graph) })
        .collect();
    let pedestrians = state
        .pedestrians
        .iter()
        .filter(|p| near(&p.bbox()))
        .map(|p| PedestrianObs { id: p.id, position: p.position(), velocity: p.velocity() })
        .collect();
    Observation {
        ego: EgoObs { bbox: state.ego.bbox, speed: state.ego.speed, accel: state.ego.accel },
        agents,
        pedestrians,
        obstacles: obstacles.iter().filter(|o| near(&o.bbox)).cloned().collect(),
        graph,
        route,
        time: t,
    }
}

fn snapshot(tick: usize, t: f64, state: &WorldState, graph: &LaneGraph) -> Snapshot {
    Snapshot {
        tick,
        t,
        ego: state.ego,
        agents: state
            .agents
            .iter()
            .map(|a| AgentSnapshot {
                id: a.id,
                lane: a.lane.clone(),
                s: a.s,
                bbox: a.bbox(graph),
                speed: a.speed,
                velocity: a.velocity(graph),
                active: a.active,
            })
            .collect(),
        pedestrians: state
            .pedestrians
            .iter()
            .map(|p| PedestrianSnapshot { id: p.id, bbox: p.bbox(), velocity: p.velocity(), phase: p.phase })
            .collect(),
        plan: None,
        behavior: None,
    }
}

fn downsample(t: &Trajectory) -> Vec<crate::planners::TrajPoint> {
    t.samples.iter().step_by(PLAN_STRIDE).copied().collect()
}

/// Contact onsets at `cur`: ego contacts with blame, then agent pairs.
fn contact_events(
    prev: &Snapshot,
    cur: &Snapshot,
    obstacles: &[ObstacleSpec],
    graph: &LaneGraph,
    dt: f64,
    touching: &mut BTreeSet<ActorRef>,
    touching_pairs: &mut BTreeSet<(u32, u32)>,
) -> Vec<EventKind> {
    let mut out = Vec::new();
    let contacts = ego_contacts(cur, obstacles);
    let now: BTreeSet<ActorRef> = contacts.iter().map(|c| c.actor).collect();
    for c in &contacts {
        if !touching.contains(&c.actor) {
            out.push(EventKind::Collision { other: c.actor, at_fault: ego_at_fault(prev, cur, c, graph, dt) });
        }
    }
    *touching = now;

    let active: Vec<&AgentSnapshot> = cur.agents.iter().filter(|a| a.active).collect();
    let mut pairs = BTreeSet::new();
    for i in 0..active.len() {
        for j in i + 1..active.len() {
            if boxes_collide(&active[i].bbox, &active[j].bbox) {
                let key = (active[i].id.min(active[j].id), active[i].id.max(active[j].id));
                pairs.insert(key);
                if !touching_pairs.contains(&key) {
                    out.push(EventKind::AgentCollision { a: key.0, b: key.1 });
                }
            }
        }
    }
    *touching_pairs = pairs;
    out
}

/// Runs `planner` through the whole scenario. Events never stop the run.
pub fn run_closed_loop(spec: &ScenarioSpec, planner: &mut dyn Planner, cfg: &SimConfig) -> SimTrace {
    let graph = &spec.graph;
    let mut state = WorldState::initial(spec);
    let mut snapshots = vec![snapshot(0, 0.0, &state, graph)];
    let mut events = Vec::new();
    let mut queries = Vec::new();
    let mut behavior = None;
    let mut touching = BTreeSet::new();
    let mut touching_pairs = BTreeSet::new();
    let mut off_road = false;

    for tick in 0..cfg.ticks() {
        let t = tick as f64 * cfg.dt;
        let obs = build_observation(&state, &spec.obstacles, graph, &spec.route, t, cfg.observation_radius);
        let (traj, err) = plan_with_fallback(planner, &obs);
        let label = planner.behavior();
        queries.extend(planner.take_queries());
        if let Some(e) = err {
            events.push(SimEvent { tick, t, kind: EventKind::PlannerFallback { error: e.to_string() } });
        }
        if let Some(l) = label {
            if behavior != Some(l) {
                events.push(SimEvent { tick, t, kind: EventKind::BehaviorSwitch { from: behavior, to: l } });
            }
        }
        behavior = label;
        {
            let last = snapshots.last_mut().expect("initial snapshot");
            last.plan = Some(downsample(&traj));
            last.behavior = label;
        }

        let (steer, accel) = track_trajectory(&traj, &state.ego, cfg);
        let ego_before = EgoView { bbox: state.ego.bbox, speed: state.ego.speed };
        let ego = kinematic_bicycle_step(&state.ego, steer, accel, cfg, cfg.dt);
        let world = World {
            graph,
            agents: &state.agents,
            obstacles: &spec.obstacles,
            pedestrians: &state.pedestrians,
        };
        let agents: Vec<AgentState> =
            state.agents.iter().map(|a| step_vehicle_agent(a, &world, &ego_before, cfg.dt)).collect();
        let pedestrians: Vec<PedestrianState> =
            state.pedestrians.iter().map(|p| step_pedestrian(p, &ego.bbox, graph, cfg.dt)).collect();
        state = WorldState { ego, agents, pedestrians };

        let (next_tick, next_t) = (tick + 1, (tick + 1) as f64 * cfg.dt);
        let snap = snapshot(next_tick, next_t, &state, graph);
        let prev = snapshots.last().expect("initial snapshot");
        for kind in contact_events(prev, &snap, &spec.obstacles, graph, cfg.dt, &mut touching, &mut touching_pairs) {
            events.push(SimEvent { tick: next_tick, t: next_t, kind });
        }
        let outside = fraction_outside_drivable(&state.ego.bbox, graph.drivable_area());
        let now_off = outside > AREA_TOLERANCE;
        if now_off && !off_road {
            events.push(SimEvent { tick: next_tick, t: next_t, kind: EventKind::AreaExit { fraction: outside } });
        }
        off_road = now_off;
        snapshots.push(snap);
    }

    SimTrace {
        version: TRACE_VERSION.to_owned(),
        scenario: spec.name.clone(),
        kind: spec.kind,
        seed: spec.seed,
        planner: planner.name().to_owned(),
        dt: cfg.dt,
        snapshots,
        events,
        queries,
    }
}

#[cfg(test)]
mod tests;

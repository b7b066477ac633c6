use crate::map::LaneId;

use super::maps::{build_map, lane_id, opposing_lane_id, MapKind, MapParams};
use super::placement::{
    augment_goal_for_lane_changes, place_accident_site, place_construction_zone, place_jaywalker,
    place_parked_vehicle, AccidentPattern, ParkedVariant,
};
use super::traffic::{assign_policies, spawn_traffic, SpawnRegion};
use super::{PolicyMode, ScenarioRng, ScenarioSpec, ScenarioType, TrafficDensity, EGO_LENGTH};

pub const SUITE_PER_TYPE: usize = 10;
pub const SCENARIO_DURATION: f64 = 15.0;
const EGO_START_S: f64 = 30.0;
const MAP_LENGTH: f64 = 400.0;
const LANE_WIDTH: f64 = 3.5;
const HIGHWAY_LIMIT: f64 = 15.0;

/// The fixed benchmark: ten instances of every scenario type, a pure
/// function of `master_seed`.
pub fn generate_benchmark_suite(master_seed: u64) -> Vec<ScenarioSpec> {
    let master = ScenarioRng::new(master_seed);
    let mut out = Vec::with_capacity(ScenarioType::ALL.len() * SUITE_PER_TYPE);
    for (t, kind) in ScenarioType::ALL.into_iter().enumerate() {
        for i in 0..SUITE_PER_TYPE {
            let seed = master.fork((t * 1000 + i) as u64).next_u64();
            let spec = build_instance(kind, i, seed);
            debug_assert!(spec.validate().is_ok(), "{}: {:?}", spec.name, spec.validate());
            out.push(spec);
        }
    }
    out
}

/// Builds instance `index` of `kind`. Panics only on a bug in the fixed
/// parameter ranges below, all of which satisfy the placement preconditions.
pub fn build_instance(kind: ScenarioType, index: usize, seed: u64) -> ScenarioSpec {
    let mut rng = ScenarioRng::new(seed);
    let name = format!("{}_{index:02}", kind.slug());
    let spec = match kind {
        ScenarioType::Construction => {
            let base = base(&name, kind, seed, params(MapKind::StraightMultilane, 2), rng.uniform(8.0, 11.0));
            let s = place_construction_zone(&base, rng.uniform(75.0, 110.0), rng.uniform(15.0, 30.0)).expect("zone");
            let s = if index % 2 == 1 {
                spawn_traffic(&s, TrafficDensity::LTD, &mut rng, &[SpawnRegion::whole(&s, &lane_id(1))])
            } else {
                s
            };
            let mode = if index % 4 == 3 { PolicyMode::Assertive } else { PolicyMode::Conservative };
            assign_policies(&s, mode, &mut rng)
        }
        ScenarioType::Accident => {
            let base = base(&name, kind, seed, params(MapKind::TwoWay, 1), rng.uniform(8.0, 11.0));
            let pattern = if index % 2 == 0 { AccidentPattern::RearEnd } else { AccidentPattern::Crossing };
            let s = place_accident_site(&base, rng.uniform(80.0, 110.0), pattern).expect("accident");
            oncoming(s, index, &mut rng)
        }
        ScenarioType::Overtake => {
            let base = base(&name, kind, seed, params(MapKind::TwoWay, 1), rng.uniform(8.0, 11.0));
            let s = place_parked_vehicle(&base, ParkedVariant::Overtake, rng.uniform(80.0, 110.0)).expect("truck");
            oncoming(s, index, &mut rng)
        }
        ScenarioType::Nudge => {
            let mut p = params(MapKind::TwoWay, 1);
            p.right_shoulder = 1.5;
            let base = base(&name, kind, seed, p, rng.uniform(8.0, 11.0));
            let encroachment = rng.uniform(0.25, 0.4);
            let s = place_parked_vehicle(&base, ParkedVariant::Nudge { encroachment }, rng.uniform(75.0, 110.0))
                .expect("parked car");
            let s = spawn_traffic(&s, TrafficDensity::LTD, &mut rng, &[SpawnRegion::whole(&s, &opposing_lane_id())]);
            assign_policies(&s, PolicyMode::Conservative, &mut rng)
        }
        ScenarioType::Jaywalker => {
            let mut p = params(MapKind::TwoWay, 1);
            p.right_shoulder = 3.0;
            let base = base(&name, kind, seed, p, rng.uniform(9.0, 12.0));
            let trigger = rng.uniform(25.0, 40.0);
            let bus_s = rng.uniform(80.0, 110.0);
            place_jaywalker(&base, bus_s, trigger, rng.uniform(1.3, 1.7)).expect("jaywalker")
        }
        ScenarioType::LaneChangeLtd | ScenarioType::LaneChangeMtd | ScenarioType::LaneChangeHtd => {
            let density = kind.density().expect("lane-change type");
            let mut p = params(MapKind::StraightMultilane, 4);
            p.speed_limit = HIGHWAY_LIMIT;
            let base = base(&name, kind, seed, p, rng.uniform(9.0, 12.0));
            const CHANGES: [usize; SUITE_PER_TYPE] = [1, 2, 3, 1, 2, 3, 1, 2, 3, 2];
            let s = augment_goal_for_lane_changes(&base, CHANGES[index % SUITE_PER_TYPE]).expect("4 lanes");
            let regions: Vec<SpawnRegion> = (0..4).map(|i| SpawnRegion::whole(&s, &lane_id(i))).collect();
            let mut s = spawn_traffic(&s, density, &mut rng, &regions);
            s.ego.speed = s.ego.speed.min(ego_equilibrium_speed(&s));
            let mode = match index {
                0..=2 => PolicyMode::Conservative,
                3..=5 => PolicyMode::Assertive,
                _ => PolicyMode::Mixed,
            };
            assign_policies(&s, mode, &mut rng)
        }
    };
    spec
}

fn params(kind: MapKind, lanes: usize) -> MapParams {
    MapParams::new(kind, lanes, LANE_WIDTH, MAP_LENGTH)
}

fn base(name: &str, kind: ScenarioType, seed: u64, p: MapParams, speed: f64) -> ScenarioSpec {
    let g = build_map(&p).expect("suite map parameters are valid");
    ScenarioSpec::base(name, kind, seed, g, &lane_id(0), EGO_START_S, speed, SCENARIO_DURATION)
        .expect("ego start inside lane")
}

/// Oncoming traffic varies with the instance: none, light, or medium.
fn oncoming(s: ScenarioSpec, index: usize, rng: &mut ScenarioRng) -> ScenarioSpec {
    let density = match index % 3 {
        0 => return s,
        1 => TrafficDensity::LTD,
        _ => TrafficDensity::MTD,
    };
    let lane: LaneId = opposing_lane_id();
    let s = spawn_traffic(&s, density, rng, &[SpawnRegion::whole(&s, &lane)]);
    assign_policies(&s, PolicyMode::Conservative, rng)
}

/// Equilibrium speed behind the nearest same-lane agent ahead of the ego.
fn ego_equilibrium_speed(s: &ScenarioSpec) -> f64 {
    let lane = s.ego_lane();
    let front = s.ego_s() + 0.5 * EGO_LENGTH;
    s.agents
        .vehicles
        .iter()
        .filter(|a| &a.lane == lane && a.s > front)
        .min_by(|a, b| a.s.total_cmp(&b.s))
        .map_or(f64::INFINITY, |a| a.params.equilibrium_speed(a.s - 0.5 * a.length - front))
}

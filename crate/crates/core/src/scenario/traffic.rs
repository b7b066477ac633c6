use crate::agents::{AgentPolicy, AgentState, IdmParams};
use crate::geometry::boxes_collide;
use crate::map::LaneId;

use super::{PolicyMode, ScenarioRng, ScenarioSpec, TrafficDensity, CAR_LENGTH, CAR_WIDTH};

/// Smallest bumper-to-bumper spacing between spawned and existing actors, m.
pub const MIN_SPAWN_GAP: f64 = 8.0;
/// Probability of the assertive tag under `PolicyMode::Mixed`.
pub const MIXED_ASSERTIVE_P: f64 = 0.5;

/// Arclength window of one lane to fill with traffic.
#[derive(Debug, Clone, PartialEq)]
pub struct SpawnRegion {
    pub lane: LaneId,
    pub s_from: f64,
    pub s_to: f64,
}

impl SpawnRegion {
    pub fn whole(spec: &ScenarioSpec, lane: &LaneId) -> Self {
        let len = spec.graph.lane(lane).map_or(0.0, |l| l.length());
        Self { lane: lane.clone(), s_from: 0.0, s_to: len }
    }
}

/// Along-lane `[rear, front]` intervals of everything already in the lane.
fn occupied(spec: &ScenarioSpec, lane: &LaneId) -> Vec<(f64, f64)> {
    let seg = spec.graph.lane(lane).expect("region lane exists");
    let half = 0.5 * seg.width;
    let mut out: Vec<(f64, f64)> = spec
        .initial_boxes()
        .iter()
        .map(|(_, b)| seg.centerline.box_extent(b))
        .filter(|e| e.overlaps_band(-half, half))
        .map(|e| (e.s_min, e.s_max))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for iv in out {
        match merged.last_mut() {
            Some(last) if iv.0 <= last.1 => last.1 = last.1.max(iv.1),
            _ => merged.push(iv),
        }
    }
    merged
}

/// Splits `total` over gaps bounded by `lo`/`hi`, weighting the slack
/// randomly and clipping at capacity.
fn fill_gaps(total: f64, lo: &[f64], hi: &[f64], rng: &mut ScenarioRng) -> Vec<f64> {
    let mut g = lo.to_vec();
    let mut slack = total - lo.iter().sum::<f64>();
    let weights: Vec<f64> = (0..lo.len()).map(|_| rng.uniform(0.2, 1.0)).collect();
    let mut open: Vec<usize> = (0..lo.len()).collect();
    while slack > 1e-9 && !open.is_empty() {
        let wsum: f64 = open.iter().map(|&i| weights[i]).sum();
        let mut next = Vec::new();
        let mut used = 0.0;
        for &i in &open {
            let want = slack * weights[i] / wsum;
            let room = hi[i] - g[i];
            if want >= room {
                g[i] = hi[i];
                used += room;
            } else {
                g[i] += want;
                used += want;
                next.push(i);
            }
        }
        slack -= used;
        if next.len() == open.len() {
            break;
        }
        open = next;
    }
    g
}

/// Fills each region with IDM agents so that consecutive bumper-to-bumper
/// gaps stay within `[MIN_SPAWN_GAP, density.max_gap]`. Starting speeds are
/// the IDM equilibrium speed for the gap ahead, capped by the limit.
pub fn spawn_traffic(
    spec: &ScenarioSpec,
    density: TrafficDensity,
    rng: &mut ScenarioRng,
    regions: &[SpawnRegion],
) -> ScenarioSpec {
    let mut out = spec.clone();
    let max_gap = density.max_gap.max(MIN_SPAWN_GAP);
    for region in regions {
        let Some(seg) = spec.graph.lane(&region.lane) else { continue };
        let s_from = region.s_from.max(0.0);
        let s_to = region.s_to.min(seg.length());
        let params = IdmParams::with_desired_speed(seg.speed_limit);
        let fixed = occupied(&out, &region.lane);

        // free stretches between fixed actors; `true` marks a closed side
        let mut stretches = Vec::new();
        let mut cursor = (s_from, false);
        for &(a, b) in fixed.iter().filter(|(a, b)| *b > s_from && *a < s_to) {
            stretches.push((cursor, (a.min(s_to), a < s_to)));
            cursor = (b.max(s_from), b > s_from);
        }
        stretches.push((cursor, (s_to, false)));

        let mut new_s = Vec::new();
        for ((a, closed_a), (b, closed_b)) in stretches {
            let span = b - a;
            if span <= 0.0 {
                continue;
            }
            let lo_end = |closed: bool| if closed { MIN_SPAWN_GAP } else { 0.0 };
            let min_len = |k: usize| {
                if k == 0 {
                    0.0
                } else {
                    k as f64 * CAR_LENGTH + lo_end(closed_a) + lo_end(closed_b) + (k - 1) as f64 * MIN_SPAWN_GAP
                }
            };
            let mut k_max = 0;
            while min_len(k_max + 1) <= span {
                k_max += 1;
            }
            let k_min = (0..=k_max)
                .find(|&k| span <= k as f64 * CAR_LENGTH + (k + 1) as f64 * max_gap)
                .unwrap_or(k_max);
            let mean_gap = 0.5 * (MIN_SPAWN_GAP + max_gap);
            let target = ((span - mean_gap) / (CAR_LENGTH + mean_gap)).round().max(0.0) as i64;
            let k = (target + rng.int(-1, 1)).clamp(k_min as i64, k_max as i64) as usize;
            if k == 0 {
                continue;
            }
            let mut lo = vec![MIN_SPAWN_GAP; k + 1];
            lo[0] = lo_end(closed_a);
            lo[k] = lo_end(closed_b);
            let hi = vec![max_gap; k + 1];
            let gaps = fill_gaps(span - k as f64 * CAR_LENGTH, &lo, &hi, rng);
            let mut rear = a;
            for gap in gaps.iter().take(k) {
                rear += gap;
                new_s.push(rear + 0.5 * CAR_LENGTH);
                rear += CAR_LENGTH;
            }
        }

        // speeds from the gap to whatever is ahead once everything is placed
        let mut ahead: Vec<f64> = fixed.iter().map(|iv| iv.0).collect();
        ahead.extend(new_s.iter().map(|s| s - 0.5 * CAR_LENGTH));
        ahead.sort_by(f64::total_cmp);
        for s in new_s {
            let front = s + 0.5 * CAR_LENGTH;
            let speed = ahead
                .iter()
                .find(|&&r| r > front)
                .map_or(seg.speed_limit, |r| params.equilibrium_speed(r - front).min(seg.speed_limit));
            let agent = AgentState {
                id: out.next_agent_id(),
                lane: region.lane.clone(),
                s,
                speed,
                length: CAR_LENGTH,
                width: CAR_WIDTH,
                policy: AgentPolicy::Conservative,
                params,
                active: true,
            };
            let b = agent.bbox(&out.graph);
            if out.initial_boxes().iter().all(|(_, o)| !boxes_collide(&b, o)) {
                out.agents.vehicles.push(agent);
            }
        }
    }
    out
}

pub fn assign_policies(spec: &ScenarioSpec, mode: PolicyMode, rng: &mut ScenarioRng) -> ScenarioSpec {
    let mut out = spec.clone();
    for a in &mut out.agents.vehicles {
        a.policy = match mode {
            PolicyMode::Conservative => AgentPolicy::Conservative,
            PolicyMode::Assertive => AgentPolicy::Assertive,
            PolicyMode::Mixed => {
                if rng.bernoulli(MIXED_ASSERTIVE_P) {
                    AgentPolicy::Assertive
                } else {
                    AgentPolicy::Conservative
                }
            }
        };
    }
    out
}

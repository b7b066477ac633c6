//! Scenario scoring: weighted components gated by multiplier penalties.

mod compute;
mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::planners::IdmPlanner;
use crate::scenario::{ScenarioSpec, ScenarioType};
use crate::sim::{run_closed_loop, SimConfig, SimTrace};

pub use compute::{
    collision_metric, comfort_metric, driving_direction_metric, drivable_area_metric, lane_change_completion,
    min_progress_multiplier, progress_metric, route_station, speed_limit_metric, stationary_metric, ttc_metric,
    wrong_way_distance, CollisionRecord,
};
pub use report::{compare_reports, scores_to_csv, suite_report, SuiteReport, REPORT_COLUMNS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricWeights {
    pub progress: f64,
    pub ttc: f64,
    pub speed_limit: f64,
    pub comfort: f64,
    /// Only used for lane-change scenario types.
    pub lane_change: f64,
}

impl Default for MetricWeights {
    fn default() -> Self {
        Self { progress: 5.0, ttc: 5.0, speed_limit: 4.0, comfort: 2.0, lane_change: 5.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComfortBounds {
    pub min_lon_accel: f64,
    pub max_lon_accel: f64,
    pub max_lat_accel: f64,
    pub max_lon_jerk: f64,
    pub max_jerk: f64,
    pub max_yaw_rate: f64,
    pub max_yaw_accel: f64,
    /// Centered moving-average window applied before each derivative.
    pub smoothing_window: usize,
}

impl Default for ComfortBounds {
    fn default() -> Self {
        Self {
            min_lon_accel: -4.05,
            max_lon_accel: 2.40,
            max_lat_accel: 4.89,
            max_lon_jerk: 4.13,
            max_jerk: 8.37,
            max_yaw_rate: 0.95,
            max_yaw_accel: 1.93,
            smoothing_window: 9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConfig {
    pub weights: MetricWeights,
    pub comfort: ComfortBounds,
    /// Minimum acceptable time to collision, s.
    pub ttc_threshold: f64,
    /// Longest allowed unjustified standstill, s.
    pub max_stationary: f64,
    /// An object this close ahead justifies standing still, m.
    pub stationary_clearance: f64,
    /// Wrong-way distance below which the direction multiplier is 1, m.
    pub direction_ok: f64,
    /// Wrong-way distance below which the direction multiplier is 0.5, m.
    pub direction_half: f64,
    /// Off-road footprint fraction tolerated per tick.
    pub area_tolerance: f64,
    /// Margin past the farthest blocking obstacle required for min progress, m.
    pub min_progress_margin: f64,
    /// How long a completed lane change must hold, s.
    pub lane_change_hold: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            weights: MetricWeights::default(),
            comfort: ComfortBounds::default(),
            ttc_threshold: 0.95,
            max_stationary: 10.0,
            stationary_clearance: 10.0,
            direction_ok: 2.0,
            direction_half: 6.0,
            area_tolerance: 0.05,
            min_progress_margin: 2.0,
            lane_change_hold: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("metric weights must be nonnegative with at least one positive")]
    Weights,
    #[error("invalid metric config: {0}")]
    Parse(String),
}

impl MetricConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let w = self.weights;
        let all = [w.progress, w.ttc, w.speed_limit, w.comfort, w.lane_change];
        if all.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || all.iter().all(|x| *x == 0.0) {
            return Err(ConfigError::Weights);
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Weighted metrics, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub progress: f64,
    pub ttc: f64,
    pub speed_limit: f64,
    pub comfort: f64,
    pub lane_change_completion: f64,
}

/// Gating metrics, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub collision: f64,
    pub drivable: f64,
    pub direction: f64,
    pub stationary: f64,
    pub min_progress: f64,
}

impl Multipliers {
    pub const ONE: Multipliers =
        Multipliers { collision: 1.0, drivable: 1.0, direction: 1.0, stationary: 1.0, min_progress: 1.0 };

    pub fn product(&self) -> f64 {
        self.collision * self.drivable * self.direction * self.stationary * self.min_progress
    }
}

/// Weighted average of the components; lane-change completion only counts
/// for lane-change types.
pub fn weighted_average(c: &Components, w: &MetricWeights, kind: ScenarioType) -> f64 {
    let mut terms = vec![
        (w.progress, c.progress),
        (w.ttc, c.ttc),
        (w.speed_limit, c.speed_limit),
        (w.comfort, c.comfort),
    ];
    if kind.is_lane_change() {
        terms.push((w.lane_change, c.lane_change_completion));
    }
    let total: f64 = terms.iter().map(|(w, _)| w).sum();
    if total <= 0.0 {
        return 0.0;
    }
    terms.iter().map(|(w, v)| w * v).sum::<f64>() / total
}

/// Final scenario score in [0, 1].
pub fn aggregate_score(c: &Components, m: &Multipliers, cfg: &MetricConfig, kind: ScenarioType) -> f64 {
    let mut m = *m;
    if kind.oncoming_pass_expected() {
        m.direction = 1.0;
    }
    (weighted_average(c, &cfg.weights, kind) * m.product()).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioScore {
    pub scenario: String,
    #[serde(rename = "type")]
    pub kind: ScenarioType,
    pub planner: String,
    pub components: Components,
    pub multipliers: Multipliers,
    pub weighted: f64,
    pub score: f64,
    pub collisions: Vec<CollisionRecord>,
}

/// Route progress of the IDM planner on `spec` with obstacles and
/// pedestrians removed; the denominator of the progress metric.
pub fn reference_progress(spec: &ScenarioSpec, sim: &SimConfig) -> f64 {
    let mut clear = spec.clone();
    clear.obstacles.clear();
    clear.agents.pedestrians.clear();
    let trace = run_closed_loop(&clear, &mut IdmPlanner::default(), sim);
    compute::trace_progress(&trace, &clear)
}

/// Scores one finished run. Pure in its inputs.
pub fn score_trace(trace: &SimTrace, spec: &ScenarioSpec, cfg: &MetricConfig, reference: f64) -> ScenarioScore {
    let (collision, collisions) = collision_metric(trace, spec);
    let components = Components {
        progress: progress_metric(trace, spec, reference),
        ttc: ttc_metric(trace, spec, cfg),
        speed_limit: speed_limit_metric(trace, spec),
        comfort: comfort_metric(trace, cfg),
        lane_change_completion: lane_change_completion(trace, spec, cfg),
    };
    let multipliers = Multipliers {
        collision,
        drivable: drivable_area_metric(trace, spec, cfg),
        direction: driving_direction_metric(trace, spec, cfg),
        stationary: stationary_metric(trace, spec, cfg),
        min_progress: min_progress_multiplier(trace, spec, cfg),
    };
    ScenarioScore {
        scenario: trace.scenario.clone(),
        kind: spec.kind,
        planner: trace.planner.clone(),
        weighted: weighted_average(&components, &cfg.weights, spec.kind),
        score: aggregate_score(&components, &multipliers, cfg, spec.kind),
        components,
        multipliers,
        collisions,
    }
}

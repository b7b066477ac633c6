use crate::llm::BehaviorSelector;

use super::{
    enumerate_behaviors, sampling_planner_plan, BehaviorLabel, BehaviorOption, Observation, PlanError, Planner,
    QueryRecord, SamplingConfig, Trajectory,
};

/// Behavior query period, s. Motion planning runs every tick.
pub const QUERY_PERIOD: f64 = 1.0;

/// Sampling planner conditioned on a behavior picked by a selector.
pub struct HybridPlanner {
    pub config: SamplingConfig,
    /// Minimum time a behavior is kept before a different one is adopted, s.
    /// Zero disables the hold.
    pub min_dwell: f64,
    selector: Box<dyn BehaviorSelector>,
    current: Option<BehaviorOption>,
    adopted_at: f64,
    last_slot: Option<i64>,
    queries: usize,
}

impl HybridPlanner {
    pub fn new(selector: Box<dyn BehaviorSelector>, config: SamplingConfig) -> Self {
        Self { config, min_dwell: 0.0, selector, current: None, adopted_at: 0.0, last_slot: None, queries: 0 }
    }

    /// Selector queries issued so far.
    pub fn query_count(&self) -> usize {
        self.queries
    }

    pub fn current_behavior(&self) -> Option<&BehaviorOption> {
        self.current.as_ref()
    }

    fn query(&mut self, obs: &Observation<'_>) {
        let options = enumerate_behaviors(obs);
        self.queries += 1;
        let chosen = match self.selector.select(obs, &options) {
            Ok(r) => options.into_iter().find(|o| o.label == r.chosen_label),
            Err(e) => {
                log::debug!("behavior query at t={:.1} failed: {e}", obs.time);
                None
            }
        };
        let Some(next) = chosen else { return };
        let held = obs.time - self.adopted_at;
        let switching = self.current.as_ref().map_or(true, |c| c.label != next.label);
        if switching && self.current.is_some() && held + 1e-9 < self.min_dwell {
            return;
        }
        if switching {
            self.adopted_at = obs.time;
        }
        self.current = Some(next);
    }
}

impl Planner for HybridPlanner {
    fn name(&self) -> &str {
        "hybrid"
    }

    fn plan(&mut self, obs: &Observation<'_>) -> Result<Trajectory, PlanError> {
        let slot = ((obs.time + 1e-9) / QUERY_PERIOD).floor() as i64;
        if self.last_slot != Some(slot) {
            self.last_slot = Some(slot);
            self.query(obs);
        }
        Ok(sampling_planner_plan(obs, &self.config, self.current.as_ref()))
    }

    fn behavior(&self) -> Option<BehaviorLabel> {
        Some(self.current.as_ref().map_or(BehaviorLabel::FollowLane, |c| c.label))
    }

    fn take_queries(&mut self) -> Vec<QueryRecord> {
        self.selector.take_queries()
    }
}

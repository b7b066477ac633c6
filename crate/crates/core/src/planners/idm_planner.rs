use crate::agents::IdmParams;

use super::reference::idm_profile;
use super::{Observation, PlanError, Planner, ReferencePath, Tracks, Trajectory};
use crate::scenario::EGO_LENGTH;

/// Lane follower: stays on the current centerline, IDM speed control.
#[derive(Debug, Clone)]
pub struct IdmPlanner {
    /// `desired_speed` is replaced by the lane speed limit at plan time.
    pub params: IdmParams<f64>,
}

impl Default for IdmPlanner {
    fn default() -> Self {
        Self { params: IdmParams::with_desired_speed(1.0) }
    }
}

pub fn idm_planner_plan(obs: &Observation<'_>, params: &IdmParams<f64>) -> Trajectory {
    let lane = obs.current_lane();
    let path = ReferencePath::along_lane(obs.graph, &lane.id, Some(obs.route));
    plan_on_path(obs, &path, 0.0, params)
}

/// IDM trajectory on `path` converging to lateral offset `d_target`,
/// following leads inside the path's lane corridor around that offset.
pub(crate) fn plan_on_path(obs: &Observation<'_>, path: &ReferencePath, d_target: f64, params: &IdmParams<f64>) -> Trajectory {
    let f = path.project(obs.ego.bbox.center.position());
    let tracks = Tracks::new(path, obs);
    let half = 0.5 * path.lane_width;
    let front = f.s + 0.5 * EGO_LENGTH;
    let leads = tracks.leads_in_band(d_target - half, d_target + half, front);
    let speeds = idm_profile(obs.ego.speed, front, &leads, path.speed_limit, params);
    path.build_trajectory(f, &obs.ego, d_target, &speeds)
}

impl Planner for IdmPlanner {
    fn name(&self) -> &str {
        "idm"
    }

    fn plan(&mut self, obs: &Observation<'_>) -> Result<Trajectory, PlanError> {
        Ok(idm_planner_plan(obs, &self.params))
    }
}

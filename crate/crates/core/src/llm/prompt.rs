use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::geometry::{Pose2D, Vec2};
use crate::map::EdgeKind;
use crate::planners::{BehaviorLabel, BehaviorOption, Observation, HORIZON};

/// At most this many actors (and separately obstacles) are described.
pub const MAX_LISTED: usize = 10;

const BEHAVIOR_INSTRUCTION: &str = "You are the behavior planner of an automated vehicle. \
Read the scene description, reason about the situation step by step, and choose exactly one \
behavior from the list of available behaviors. Coordinates are in the ego frame: x points \
forward and y points left, in meters. End your answer with the chosen behavior label, written \
verbatim, alone on the final line.";

const WAYPOINTS_INSTRUCTION: &str = "You are the motion planner of an automated vehicle. \
Read the scene description and plan a safe, comfortable trajectory that follows the route. \
Coordinates are in the ego frame: x points forward and y points left, in meters.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptMode {
    Behavior,
    Waypoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub mode: PromptMode,
    pub task_instruction: String,
    pub perception_context: String,
    pub ego_states: String,
    pub mission_goal: String,
    /// Enumerated behaviors, or the trajectory format in waypoints mode.
    pub options: String,
}

impl PromptBundle {
    /// Everything except the task instruction, as one chat message.
    pub fn user_message(&self) -> String {
        let last = match self.mode {
            PromptMode::Behavior => "Available behaviors",
            PromptMode::Waypoints => "Output format",
        };
        format!(
            "Perception:\n{}\n\nEgo states:\n{}\n\nMission goal:\n{}\n\n{last}:\n{}",
            self.perception_context, self.ego_states, self.mission_goal, self.options
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneText {
    pub perception: String,
    pub ego_states: String,
    pub mission_goal: String,
}

/// One decimal, without a negative zero.
fn num(x: f64) -> String {
    let r = (x * 10.0).round() / 10.0;
    if r == 0.0 {
        "+0.0".to_owned()
    } else {
        format!("{r:+.1}")
    }
}

fn local_vec(pose: &Pose2D<f64>, v: Vec2<f64>) -> Vec2<f64> {
    let (s, c) = pose.heading.sin_cos();
    Vec2::new(c * v.x + s * v.y, -s * v.x + c * v.y)
}

pub fn render_scene_description(obs: &Observation<'_>) -> SceneText {
    let ego = obs.ego.bbox.center;
    let here = ego.position();
    let lane = obs.current_lane();

    let mut actors: Vec<(f64, String)> = Vec::new();
    for a in &obs.agents {
        let p = ego.to_local(a.bbox.center.position());
        let v = local_vec(&ego, a.velocity);
        let line = format!(
            "- vehicle {}: lane {}, longitudinal {} m, lateral {} m, velocity ({}, {}) m/s",
            a.id,
            a.lane,
            num(p.x),
            num(p.y),
            num(v.x),
            num(v.y)
        );
        actors.push((a.bbox.center.position().dist(here), line));
    }
    for p in &obs.pedestrians {
        let q = ego.to_local(p.position);
        let v = local_vec(&ego, p.velocity);
        let line = format!(
            "- pedestrian {}: longitudinal {} m, lateral {} m, velocity ({}, {}) m/s",
            p.id,
            num(q.x),
            num(q.y),
            num(v.x),
            num(v.y)
        );
        actors.push((p.position.dist(here), line));
    }
    actors.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    actors.truncate(MAX_LISTED);

    let mut obstacles: Vec<(f64, String)> = obs
        .obstacles
        .iter()
        .map(|o| {
            let p = ego.to_local(o.bbox.center.position());
            let line = format!(
                "- {}: lane {}, longitudinal {} m, lateral {} m, size {} x {} m",
                o.kind.as_str().replace('_', " "),
                o.lane,
                num(p.x),
                num(p.y),
                num(o.bbox.length).trim_start_matches('+'),
                num(o.bbox.width).trim_start_matches('+')
            );
            (o.bbox.center.position().dist(here), line)
        })
        .collect();
    obstacles.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    obstacles.truncate(MAX_LISTED);

    let mut perception = String::new();
    let neighbor = |n: &Option<crate::map::LaneId>| n.as_ref().map_or("none".to_owned(), |l| l.to_string());
    let _ = writeln!(
        perception,
        "Current lane: {}, speed limit {} m/s. Left neighbor: {}. Right neighbor: {}.",
        lane.id,
        num(lane.speed_limit).trim_start_matches('+'),
        neighbor(&lane.left_neighbor),
        neighbor(&lane.right_neighbor)
    );
    if actors.is_empty() {
        perception.push_str("Agents: none.\n");
    } else {
        perception.push_str("Agents:\n");
        for (_, l) in &actors {
            perception.push_str(l);
            perception.push('\n');
        }
    }
    if obstacles.is_empty() {
        perception.push_str("Obstacles: none.");
    } else {
        perception.push_str("Obstacles:");
        for (_, l) in &obstacles {
            perception.push('\n');
            perception.push_str(l);
        }
    }

    let f = lane.project(here);
    let ego_states = format!(
        "Speed: {} m/s\nAcceleration: {} m/s^2\nLateral offset from lane center: {} m",
        num(obs.ego.speed).trim_start_matches('+'),
        num(obs.ego.accel),
        num(f.d)
    );

    let route = obs.route;
    let lanes: Vec<&str> = route.lane_sequence.iter().map(|l| l.as_str()).collect();
    let goal = ego.to_local(route.goal_pose.position());
    let pending = match (route.changes_done_at(&lane.id), route.next_change_after(&lane.id)) {
        (Some(_), Some(EdgeKind::Left)) => "the next lane change is to the left".to_owned(),
        (Some(_), Some(EdgeKind::Right)) => "the next lane change is to the right".to_owned(),
        (Some(_), _) => "no lane change is pending".to_owned(),
        (None, _) => "the current lane is not on the route".to_owned(),
    };
    let mission_goal = format!(
        "Lanes on route: {}. Currently in {}; {}. Goal at longitudinal {} m, lateral {} m.",
        lanes.join(" -> "),
        lane.id,
        pending,
        num(goal.x),
        num(goal.y)
    );
    SceneText { perception, ego_states, mission_goal }
}

fn describe_option(o: &BehaviorOption) -> String {
    let cap = num(o.target_speed_cap);
    let cap = cap.trim_start_matches('+');
    match o.label {
        BehaviorLabel::FollowLane => format!("keep lane {} at up to {cap} m/s", o.centerline),
        BehaviorLabel::MergeLeft | BehaviorLabel::MergeRight => {
            format!("move to lane {} at up to {cap} m/s", o.centerline)
        }
        BehaviorLabel::OvertakeObstacle => match &o.blocker {
            Some(b) => format!(
                "pass the {} {} m ahead at lateral offset {} m from lane {}",
                b.kind.replace('_', " "),
                num(b.distance).trim_start_matches('+'),
                num(o.lateral_offset),
                o.centerline
            ),
            None => format!("pass at lateral offset {} m from lane {}", num(o.lateral_offset), o.centerline),
        },
        BehaviorLabel::StopAndWait => "stop and wait in the current lane".to_owned(),
    }
}

pub fn build_behavior_prompt(obs: &Observation<'_>, options: &[BehaviorOption]) -> PromptBundle {
    let scene = render_scene_description(obs);
    let options = options
        .iter()
        .enumerate()
        .map(|(i, o)| format!("{}. {}: {}", i + 1, o.label.phrase(), describe_option(o)))
        .collect::<Vec<_>>()
        .join("\n");
    PromptBundle {
        mode: PromptMode::Behavior,
        task_instruction: BEHAVIOR_INSTRUCTION.to_owned(),
        perception_context: scene.perception,
        ego_states: scene.ego_states,
        mission_goal: scene.mission_goal,
        options,
    }
}

pub fn build_waypoints_prompt(obs: &Observation<'_>) -> PromptBundle {
    let scene = render_scene_description(obs);
    let n = super::WAYPOINT_COUNT;
    let options = format!(
        "Plan the next {HORIZON:.0} seconds as {n} waypoints, one every 0.5 s. You may reason first. \
Then write the waypoints as a list of (x, y) pairs in meters: [(x1, y1), (x2, y2), ..., (x{n}, y{n})]"
    );
    PromptBundle {
        mode: PromptMode::Waypoints,
        task_instruction: WAYPOINTS_INSTRUCTION.to_owned(),
        perception_context: scene.perception,
        ego_states: scene.ego_states,
        mission_goal: scene.mission_goal,
        options,
    }
}

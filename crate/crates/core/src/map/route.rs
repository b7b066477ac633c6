use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{LaneGraph, LaneId};
use crate::geometry::Pose2D;

/// How a route moves from one lane to the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Successor,
    Left,
    Right,
}

impl EdgeKind {
    pub fn is_lane_change(self) -> bool {
        !matches!(self, EdgeKind::Successor)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RouteError {
    #[error("unknown lane {0}")]
    UnknownLane(LaneId),
    #[error("no route from {from} to {to}")]
    NoRoute { from: LaneId, to: LaneId },
    #[error("route step {0} is not a graph edge")]
    Disconnected(usize),
    #[error("route is empty or edge count does not match lanes")]
    Malformed,
    #[error("goal pose is not on the last lane")]
    GoalOffRoute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub lane_sequence: Vec<LaneId>,
    /// `edges[i]` connects `lane_sequence[i]` to `lane_sequence[i + 1]`.
    pub edges: Vec<EdgeKind>,
    pub goal_pose: Pose2D<f64>,
}

impl Route {
    pub fn first_lane(&self) -> &LaneId {
        &self.lane_sequence[0]
    }

    pub fn last_lane(&self) -> &LaneId {
        self.lane_sequence.last().expect("validated route is non-empty")
    }

    /// Lane changes completed once the vehicle is on `lane`; `None` when the
    /// lane is not on the route.
    pub fn changes_done_at(&self, lane: &LaneId) -> Option<usize> {
        let pos = self.lane_sequence.iter().rposition(|l| l == lane)?;
        Some(self.edges[..pos].iter().filter(|e| e.is_lane_change()).count())
    }

    /// Side of the next pending lane change after `lane`, if any.
    pub fn next_change_after(&self, lane: &LaneId) -> Option<EdgeKind> {
        let pos = self.lane_sequence.iter().rposition(|l| l == lane)?;
        self.edges[pos..].iter().copied().find(|e| e.is_lane_change())
    }

    pub fn validate(&self, g: &LaneGraph) -> Result<(), RouteError> {
        if self.lane_sequence.is_empty() || self.edges.len() + 1 != self.lane_sequence.len() {
            return Err(RouteError::Malformed);
        }
        for id in &self.lane_sequence {
            g.lane(id).ok_or_else(|| RouteError::UnknownLane(id.clone()))?;
        }
        for (i, (pair, edge)) in self.lane_sequence.windows(2).zip(&self.edges).enumerate() {
            let from = g.lane(&pair[0]).expect("checked");
            let ok = match edge {
                EdgeKind::Successor => from.successors.contains(&pair[1]),
                EdgeKind::Left => from.left_neighbor.as_ref() == Some(&pair[1]),
                EdgeKind::Right => from.right_neighbor.as_ref() == Some(&pair[1]),
            };
            if !ok {
                return Err(RouteError::Disconnected(i));
            }
        }
        let last = g.lane(self.last_lane()).expect("checked");
        let f = last.project(self.goal_pose.position());
        if f.d.abs() > 0.5 * last.width + 1e-6 {
            return Err(RouteError::GoalOffRoute);
        }
        Ok(())
    }
}

/// Number of neighbor-edge transitions along the route.
pub fn lane_changes_required(r: &Route) -> usize {
    r.edges.iter().filter(|e| e.is_lane_change()).count()
}

/// Fewest-lane-change route; ties go to fewer hops, then to the
/// lexicographically smallest lane sequence.
pub fn shortest_route(
    g: &LaneGraph,
    start: &LaneId,
    goal: &LaneId,
    goal_pose: Pose2D<f64>,
) -> Result<Route, RouteError> {
    for id in [start, goal] {
        g.lane(id).ok_or_else(|| RouteError::UnknownLane(id.clone()))?;
    }
    type Key = (usize, usize, Vec<LaneId>);
    let mut settled: BTreeMap<LaneId, ()> = BTreeMap::new();
    let mut heap: BinaryHeap<Reverse<(Key, Vec<EdgeKind>)>> = BinaryHeap::new();
    heap.push(Reverse(((0, 0, vec![start.clone()]), vec![])));
    while let Some(Reverse(((changes, hops, path), edges))) = heap.pop() {
        let here = path.last().expect("non-empty").clone();
        if settled.insert(here.clone(), ()).is_some() {
            continue;
        }
        if here == *goal {
            return Ok(Route {
                lane_sequence: path,
                edges,
                goal_pose,
            });
        }
        let lane = g.lane(&here).expect("graph references validated");
        let next = lane
            .successors
            .iter()
            .map(|s| (s, EdgeKind::Successor))
            .chain(lane.left_neighbor.iter().map(|l| (l, EdgeKind::Left)))
            .chain(lane.right_neighbor.iter().map(|r| (r, EdgeKind::Right)));
        for (id, kind) in next {
            if settled.contains_key(id) {
                continue;
            }
            let mut p = path.clone();
            p.push(id.clone());
            let mut e = edges.clone();
            e.push(kind);
            let c = changes + usize::from(kind.is_lane_change());
            heap.push(Reverse(((c, hops + 1, p), e)));
        }
    }
    Err(RouteError::NoRoute {
        from: start.clone(),
        to: goal.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::tests::{big_area, straight_lane};
    use crate::map::LaneSegment;

    fn four_lanes() -> LaneGraph {
        let mut lanes: Vec<LaneSegment> = (0..4)
            .map(|i| straight_lane(&format!("L{i}"), 3.5 * i as f64, 300.0))
            .collect();
        for i in 0..4 {
            if i + 1 < 4 {
                lanes[i].left_neighbor = Some(format!("L{}", i + 1).as_str().into());
            }
            if i > 0 {
                lanes[i].right_neighbor = Some(format!("L{}", i - 1).as_str().into());
            }
        }
        LaneGraph::new(lanes, big_area()).unwrap()
    }

    #[test]
    fn same_lane_route() {
        let g = four_lanes();
        let r = shortest_route(&g, &"L0".into(), &"L0".into(), Pose2D::new(200.0, 0.0, 0.0)).unwrap();
        assert_eq!(r.lane_sequence.len(), 1);
        assert_eq!(lane_changes_required(&r), 0);
        r.validate(&g).unwrap();
    }

    #[test]
    fn rightmost_to_leftmost_needs_three_changes() {
        let g = four_lanes();
        let r = shortest_route(&g, &"L0".into(), &"L3".into(), Pose2D::new(280.0, 10.5, 0.0)).unwrap();
        assert_eq!(lane_changes_required(&r), 3);
        assert_eq!(r.edges, vec![EdgeKind::Left; 3]);
        r.validate(&g).unwrap();
        assert_eq!(r.changes_done_at(&"L2".into()), Some(2));
        assert_eq!(r.next_change_after(&"L0".into()), Some(EdgeKind::Left));
    }

    #[test]
    fn disconnected_graph_has_no_route() {
        let g = LaneGraph::new(
            vec![straight_lane("a", 0.0, 100.0), straight_lane("b", 20.0, 100.0)],
            big_area(),
        )
        .unwrap();
        assert!(matches!(
            shortest_route(&g, &"a".into(), &"b".into(), Pose2D::new(50.0, 20.0, 0.0)),
            Err(RouteError::NoRoute { .. })
        ));
    }

    #[test]
    fn successor_and_neighbor_alternation() {
        // a -> b (successor), b <-> c (neighbors), c -> d (successor), d <-> e
        let mut a = straight_lane("a", 0.0, 100.0);
        let mut b = straight_lane("b", 0.0, 100.0);
        let mut c = straight_lane("c", 3.5, 100.0);
        let mut d = straight_lane("d", 3.5, 100.0);
        let mut e = straight_lane("e", 7.0, 100.0);
        a.successors = vec!["b".into()];
        b.left_neighbor = Some("c".into());
        c.right_neighbor = Some("b".into());
        c.successors = vec!["d".into()];
        d.left_neighbor = Some("e".into());
        e.right_neighbor = Some("d".into());
        let g = LaneGraph::new(vec![a, b, c, d, e], big_area()).unwrap();
        let r = shortest_route(&g, &"a".into(), &"e".into(), Pose2D::new(50.0, 7.0, 0.0)).unwrap();
        assert_eq!(lane_changes_required(&r), 2);
        r.validate(&g).unwrap();
    }

    #[test]
    fn validation_catches_bad_edges() {
        let g = four_lanes();
        let r = Route {
            lane_sequence: vec!["L0".into(), "L2".into()],
            edges: vec![EdgeKind::Left],
            goal_pose: Pose2D::new(10.0, 7.0, 0.0),
        };
        assert_eq!(r.validate(&g), Err(RouteError::Disconnected(0)));
        let r = Route {
            lane_sequence: vec!["L0".into()],
            edges: vec![],
            goal_pose: Pose2D::new(10.0, 7.0, 0.0),
        };
        assert_eq!(r.validate(&g), Err(RouteError::GoalOffRoute));
    }
}

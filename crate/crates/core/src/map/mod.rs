//! Lane-graph map model and routing.

mod route;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{FrenetPoint, Polygon, Polyline, Vec2};
use crate::scalar::normalize_angle;

pub use route::{lane_changes_required, shortest_route, EdgeKind, Route, RouteError};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LaneId(pub String);

impl LaneId {
    pub fn new(s: impl Into<String>) -> Self {
        Self(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LaneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for LaneId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneSegment {
    pub id: LaneId,
    pub centerline: Polyline<f64>,
    pub width: f64,
    pub speed_limit: f64,
    #[serde(default)]
    pub successors: Vec<LaneId>,
    #[serde(default)]
    pub left_neighbor: Option<LaneId>,
    #[serde(default)]
    pub right_neighbor: Option<LaneId>,
}

impl LaneSegment {
    pub fn length(&self) -> f64 {
        self.centerline.length()
    }

    pub fn project(&self, p: Vec2<f64>) -> FrenetPoint<f64> {
        self.centerline.project(p)
    }

    /// True when `p` projects strictly inside the lane (not clamped at an end)
    /// and lies within half a lane width of the centerline.
    pub fn contains(&self, p: Vec2<f64>) -> bool {
        let f = self.project(p);
        f.s > 0.0 && f.s < self.length() && f.d.abs() <= 0.5 * self.width
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("duplicate lane id {0}")]
    DuplicateLane(LaneId),
    #[error("lane {from} references unknown lane {to}")]
    UnknownReference { from: LaneId, to: LaneId },
    #[error("lane {0} references itself")]
    SelfLoop(LaneId),
    #[error("neighbor relation between {0} and {1} is not symmetric")]
    AsymmetricNeighbor(LaneId, LaneId),
    #[error("lane {0} has non-positive width or speed limit")]
    BadDimensions(LaneId),
    #[error("lane {lane} leaves the drivable area near s = {s:.1}")]
    OutsideDrivable { lane: LaneId, s: f64 },
}

/// Directed lane graph plus the drivable area it lives in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct LaneGraph {
    segments: BTreeMap<LaneId, LaneSegment>,
    drivable_area: Vec<Polygon<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    lanes: Vec<LaneSegment>,
    drivable_area: Vec<Polygon<f64>>,
}

impl TryFrom<RawGraph> for LaneGraph {
    type Error = GraphError;
    fn try_from(raw: RawGraph) -> Result<Self, GraphError> {
        LaneGraph::new(raw.lanes, raw.drivable_area)
    }
}

impl From<LaneGraph> for RawGraph {
    fn from(g: LaneGraph) -> Self {
        RawGraph {
            lanes: g.segments.into_values().collect(),
            drivable_area: g.drivable_area,
        }
    }
}

impl LaneGraph {
    pub fn new(lanes: Vec<LaneSegment>, drivable_area: Vec<Polygon<f64>>) -> Result<Self, GraphError> {
        let mut segments = BTreeMap::new();
        for lane in lanes {
            if !(lane.width > 0.0) || !(lane.speed_limit > 0.0) {
                return Err(GraphError::BadDimensions(lane.id));
            }
            if segments.contains_key(&lane.id) {
                return Err(GraphError::DuplicateLane(lane.id));
            }
            segments.insert(lane.id.clone(), lane);
        }
        for lane in segments.values() {
            let refs = lane
                .successors
                .iter()
                .chain(lane.left_neighbor.iter())
                .chain(lane.right_neighbor.iter());
            for r in refs {
                if *r == lane.id {
                    return Err(GraphError::SelfLoop(lane.id.clone()));
                }
                if !segments.contains_key(r) {
                    return Err(GraphError::UnknownReference {
                        from: lane.id.clone(),
                        to: r.clone(),
                    });
                }
            }
            if let Some(l) = &lane.left_neighbor {
                if segments[l].right_neighbor.as_ref() != Some(&lane.id) {
                    return Err(GraphError::AsymmetricNeighbor(lane.id.clone(), l.clone()));
                }
            }
            if let Some(r) = &lane.right_neighbor {
                if segments[r].left_neighbor.as_ref() != Some(&lane.id) {
                    return Err(GraphError::AsymmetricNeighbor(lane.id.clone(), r.clone()));
                }
            }
        }
        let graph = Self {
            segments,
            drivable_area,
        };
        graph.check_corridors()?;
        Ok(graph)
    }

    fn check_corridors(&self) -> Result<(), GraphError> {
        for lane in self.segments.values() {
            let len = lane.length();
            let steps = (len / 2.0).ceil().max(1.0) as usize;
            let inset = 0.5 * lane.width - 0.01;
            for i in 0..=steps {
                // ends sit on the area boundary; probe a little inside them
                let margin = 0.5f64.min(0.25 * len);
                let s = (len * i as f64 / steps as f64).clamp(margin, len - margin);
                let (p, t) = lane.centerline.sample(s);
                for side in [-1.0, 0.0, 1.0] {
                    let q = p + t.perp() * (side * inset);
                    if !self.drivable_area.iter().any(|poly| poly.contains(q)) {
                        return Err(GraphError::OutsideDrivable {
                            lane: lane.id.clone(),
                            s,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn lane(&self, id: &LaneId) -> Option<&LaneSegment> {
        self.segments.get(id)
    }

    pub fn lanes(&self) -> impl Iterator<Item = &LaneSegment> {
        self.segments.values()
    }

    pub fn drivable_area(&self) -> &[Polygon<f64>] {
        &self.drivable_area
    }

    /// Lane nearest to `p` whose direction agrees with `heading` (within 90 deg)
    /// when a heading is given.
    pub fn nearest_lane(
        &self,
        p: Vec2<f64>,
        heading: Option<f64>,
    ) -> Option<(&LaneSegment, FrenetPoint<f64>)> {
        let mut best: Option<(&LaneSegment, FrenetPoint<f64>, f64)> = None;
        for lane in self.segments.values() {
            let f = lane.project(p);
            if let Some(h) = heading {
                let lane_h = lane.centerline.heading_at(f.s);
                if normalize_angle(lane_h - h).abs() > std::f64::consts::FRAC_PI_2 {
                    continue;
                }
            }
            // distance to the lane, penalizing clamped projections beyond the ends
            let (q, _) = lane.centerline.sample(f.s);
            let dist = q.dist(p);
            if best.as_ref().map_or(true, |(_, _, d)| dist < *d) {
                best = Some((lane, f, dist));
            }
        }
        best.map(|(l, f, _)| (l, f))
    }

    /// True when lanes `a` and `b` run in opposite directions near `at`.
    pub fn is_opposing(&self, a: &LaneId, b: &LaneId, at: Vec2<f64>) -> bool {
        match (self.lane(a), self.lane(b)) {
            (Some(la), Some(lb)) => {
                let ha = la.centerline.heading_at(la.project(at).s);
                let hb = lb.centerline.heading_at(lb.project(at).s);
                normalize_angle(ha - hb).abs() > std::f64::consts::FRAC_PI_2
            }
            _ => false,
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn straight_lane(id: &str, y: f64, len: f64) -> LaneSegment {
        LaneSegment {
            id: id.into(),
            centerline: Polyline::new(vec![Vec2::new(0.0, y), Vec2::new(len, y)]).unwrap(),
            width: 3.5,
            speed_limit: 15.0,
            successors: vec![],
            left_neighbor: None,
            right_neighbor: None,
        }
    }

    pub(crate) fn big_area() -> Vec<Polygon<f64>> {
        vec![Polygon::rect(Vec2::new(-10.0, -50.0), Vec2::new(1000.0, 50.0))]
    }

    #[test]
    fn asymmetric_neighbors_rejected() {
        let mut a = straight_lane("a", 0.0, 100.0);
        let b = straight_lane("b", 3.5, 100.0);
        a.left_neighbor = Some("b".into());
        let err = LaneGraph::new(vec![a, b], big_area()).unwrap_err();
        assert!(matches!(err, GraphError::AsymmetricNeighbor(..)));
    }

    #[test]
    fn unknown_and_self_references_rejected() {
        let mut a = straight_lane("a", 0.0, 100.0);
        a.successors = vec!["zzz".into()];
        assert!(matches!(
            LaneGraph::new(vec![a.clone()], big_area()),
            Err(GraphError::UnknownReference { .. })
        ));
        a.successors = vec!["a".into()];
        assert!(matches!(
            LaneGraph::new(vec![a], big_area()),
            Err(GraphError::SelfLoop(_))
        ));
    }

    #[test]
    fn corridor_must_be_drivable() {
        let a = straight_lane("a", 0.0, 100.0);
        let small = vec![Polygon::rect(Vec2::new(0.0, -1.0), Vec2::new(100.0, 1.0))];
        assert!(matches!(
            LaneGraph::new(vec![a], small),
            Err(GraphError::OutsideDrivable { .. })
        ));
    }

    #[test]
    fn nearest_lane_respects_direction() {
        let a = straight_lane("a", 0.0, 100.0);
        let mut b = straight_lane("b", 3.5, 100.0);
        b.centerline = b.centerline.reversed();
        let g = LaneGraph::new(vec![a, b], big_area()).unwrap();
        let p = Vec2::new(50.0, 3.0);
        assert_eq!(g.nearest_lane(p, None).unwrap().0.id.as_str(), "b");
        assert_eq!(g.nearest_lane(p, Some(0.0)).unwrap().0.id.as_str(), "a");
        assert!(g.is_opposing(&"a".into(), &"b".into(), p));
    }

    #[test]
    fn serde_round_trip_revalidates() {
        let mut a = straight_lane("a", 0.0, 100.0);
        let mut b = straight_lane("b", 3.5, 100.0);
        a.left_neighbor = Some("b".into());
        b.right_neighbor = Some("a".into());
        let g = LaneGraph::new(vec![a, b], big_area()).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        let back: LaneGraph = serde_json::from_str(&text).unwrap();
        assert_eq!(g, back);
        let broken = text.replace("\"right_neighbor\":\"a\"", "\"right_neighbor\":null");
        assert!(serde_json::from_str::<LaneGraph>(&broken).is_err());
    }
}

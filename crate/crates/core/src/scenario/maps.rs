use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Polygon, Polyline, Vec2};
use crate::map::{GraphError, LaneGraph, LaneId, LaneSegment};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum MapKind {
    StraightMultilane,
    /// Left-hand bend; `radius` is that of the rightmost lane centerline.
    Curved { radius: f64 },
    /// Same-direction lanes plus one opposing lane on the left.
    TwoWay,
}

/// Synthetic map parameters. Lanes run along +x from the origin, `L0` is
/// the rightmost lane and `O0` the opposing lane when present.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub kind: MapKind,
    pub lanes: usize,
    pub lane_width: f64,
    pub length: f64,
    pub speed_limit: f64,
    pub right_shoulder: f64,
    pub left_shoulder: f64,
}

impl MapParams {
    pub fn new(kind: MapKind, lanes: usize, lane_width: f64, length: f64) -> Self {
        Self {
            kind,
            lanes,
            lane_width,
            length,
            speed_limit: DEFAULT_SPEED_LIMIT,
            right_shoulder: 1.0,
            left_shoulder: 1.0,
        }
    }
}

pub const DEFAULT_SPEED_LIMIT: f64 = 12.5;
pub const MIN_MAP_LENGTH: f64 = 200.0;
const ARC_STEP: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("map dimensions must be positive (lanes >= 1, width, shoulders, speed limit)")]
    BadDimensions,
    #[error("map length {0} m is below the {MIN_MAP_LENGTH} m minimum")]
    TooShort(f64),
    #[error("curve radius too small for the road cross-section")]
    RadiusTooSmall,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub fn lane_id(i: usize) -> LaneId {
    LaneId::new(format!("L{i}"))
}

pub fn opposing_lane_id() -> LaneId {
    LaneId::new("O0")
}

/// Builds a map with default speed limit and 1 m shoulders.
pub fn build_base_map(kind: MapKind, lanes: usize, lane_width: f64, length: f64) -> Result<LaneGraph, MapError> {
    build_map(&MapParams::new(kind, lanes, lane_width, length))
}

pub fn build_map(p: &MapParams) -> Result<LaneGraph, MapError> {
    let positive = [p.lane_width, p.speed_limit, p.length];
    if p.lanes == 0 || positive.iter().any(|x| !(*x > 0.0)) || !(p.right_shoulder >= 0.0) || !(p.left_shoulder >= 0.0) {
        return Err(MapError::BadDimensions);
    }
    if p.length < MIN_MAP_LENGTH {
        return Err(MapError::TooShort(p.length));
    }
    let two_way = matches!(p.kind, MapKind::TwoWay);
    let n_total = p.lanes + usize::from(two_way);
    let w = p.lane_width;
    let right_edge = -0.5 * w - p.right_shoulder;
    let left_edge = (n_total as f64 - 0.5) * w + p.left_shoulder;

    // returns the line at lateral offset d (left positive) from lane L0
    let line_at: Box<dyn Fn(f64) -> Vec<Vec2<f64>>> = match p.kind {
        MapKind::StraightMultilane | MapKind::TwoWay => {
            let len = p.length;
            Box::new(move |d| vec![Vec2::new(0.0, d), Vec2::new(len, d)])
        }
        MapKind::Curved { radius } => {
            if !(radius - left_edge > 1.0) {
                return Err(MapError::RadiusTooSmall);
            }
            let theta = p.length / radius;
            let n = (p.length / ARC_STEP).ceil() as usize;
            Box::new(move |d| {
                let r = radius - d;
                (0..=n)
                    .map(|k| {
                        let a = theta * k as f64 / n as f64;
                        Vec2::new(r * a.sin(), radius - r * a.cos())
                    })
                    .collect()
            })
        }
    };

    let mut segments = Vec::with_capacity(n_total);
    for i in 0..p.lanes {
        segments.push(LaneSegment {
            id: lane_id(i),
            centerline: Polyline::new(line_at(i as f64 * w)).expect("well-formed centerline"),
            width: w,
            speed_limit: p.speed_limit,
            successors: vec![],
            left_neighbor: (i + 1 < p.lanes).then(|| lane_id(i + 1)),
            right_neighbor: (i > 0).then(|| lane_id(i - 1)),
        });
    }
    if two_way {
        let line = Polyline::new(line_at(p.lanes as f64 * w)).expect("well-formed centerline");
        segments.push(LaneSegment {
            id: opposing_lane_id(),
            centerline: line.reversed(),
            width: w,
            speed_limit: p.speed_limit,
            successors: vec![],
            left_neighbor: None,
            right_neighbor: None,
        });
    }

    let inner = line_at(right_edge);
    let outer = line_at(left_edge);
    let area = inner
        .windows(2)
        .zip(outer.windows(2))
        .map(|(a, b)| Polygon::new(vec![a[0], a[1], b[1], b[0]]))
        .collect();
    Ok(LaneGraph::new(segments, area)?)
}

//! Planar geometry shared by the map, the agents, the planners and the metrics.
//!
//! Everything here is generic over [`Scalar`]; the rest of the crate uses the
//! `f64` aliases re-exported from the crate root.

mod obb;
mod polygon;
mod polyline;
mod pose;

pub use obb::{boxes_collide, OrientedBox};
pub use polygon::{fraction_outside_drivable, fraction_outside_drivable_grid, Polygon};
pub use polyline::{round_trip_error, FrenetExtent, FrenetPoint, Polyline, PolylineError};
pub use pose::{Pose2D, Vec2};

use crate::scalar::Scalar;

/// Drivable area as a union of simple polygons.
pub type DrivableArea<T> = [Polygon<T>];

/// Grid resolution used by the metric-side drivable-area check.
pub const DRIVABLE_GRID: usize = 32;

#[inline]
pub(crate) fn cross<T: Scalar>(a: Vec2<T>, b: Vec2<T>) -> T {
    a.x * b.y - a.y * b.x
}

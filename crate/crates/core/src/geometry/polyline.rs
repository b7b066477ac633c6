use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{cross, OrientedBox, Pose2D, Vec2};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolylineError {
    #[error("polyline needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("consecutive points {0} and {1} coincide")]
    RepeatedPoint(usize, usize),
    #[error("non-finite coordinate at point {0}")]
    NonFinite(usize),
    #[error("arclength {s} outside [0, {length}]")]
    OutOfRange { s: f64, length: f64 },
}

/// Arclength `s` along a centerline and signed lateral offset `d` (left positive).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FrenetPoint<T> {
    pub s: T,
    pub d: T,
}

impl<T: Scalar> FrenetPoint<T> {
    pub fn new(s: T, d: T) -> Self {
        Self { s, d }
    }
}

/// Axis-aligned bounds in Frenet coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetExtent<T> {
    pub s_min: T,
    pub s_max: T,
    pub d_min: T,
    pub d_max: T,
}

impl<T: Scalar> FrenetExtent<T> {
    /// Whether the lateral interval intersects `[lo, hi]`.
    pub fn overlaps_band(&self, lo: T, hi: T) -> bool {
        self.d_max >= lo && self.d_min <= hi
    }
}

/// Open polyline with a cached cumulative arclength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[T; 2]>", into = "Vec<[T; 2]>")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct Polyline<T> {
    points: Vec<Vec2<T>>,
    cumulative: Vec<T>,
}

impl<T: Scalar> TryFrom<Vec<[T; 2]>> for Polyline<T> {
    type Error = PolylineError;
    fn try_from(raw: Vec<[T; 2]>) -> Result<Self, Self::Error> {
        Self::new(raw.into_iter().map(|[x, y]| Vec2::new(x, y)).collect())
    }
}

impl<T: Scalar> From<Polyline<T>> for Vec<[T; 2]> {
    fn from(p: Polyline<T>) -> Self {
        p.points.iter().map(|v| [v.x, v.y]).collect()
    }
}

impl<T: Scalar> Polyline<T> {
    pub fn new(points: Vec<Vec2<T>>) -> Result<Self, PolylineError> {
        if points.len() < 2 {
            return Err(PolylineError::TooFewPoints(points.len()));
        }
        let mut cumulative = Vec::with_capacity(points.len());
        cumulative.push(T::ZERO);
        for (i, p) in points.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(PolylineError::NonFinite(i));
            }
            if i > 0 {
                let seg = p.dist(points[i - 1]);
                if seg <= T::ZERO {
                    return Err(PolylineError::RepeatedPoint(i - 1, i));
                }
                cumulative.push(cumulative[i - 1] + seg);
            }
        }
        Ok(Self { points, cumulative })
    }

    pub fn points(&self) -> &[Vec2<T>] {
        &self.points
    }

    pub fn length(&self) -> T {
        *self.cumulative.last().expect("non-empty")
    }

    pub fn cumulative(&self) -> &[T] {
        &self.cumulative
    }

    fn segment_at(&self, s: T) -> usize {
        let n = self.points.len() - 1;
        // first index with cumulative > s, minus one
        let idx = self.cumulative.partition_point(|&c| c <= s);
        idx.saturating_sub(1).min(n - 1)
    }

    fn tangent(&self, seg: usize) -> Vec2<T> {
        let d = self.points[seg + 1] - self.points[seg];
        d * (T::ONE / d.norm())
    }

    /// Point and unit tangent at arclength `s`, clamped to the polyline.
    pub fn sample(&self, s: T) -> (Vec2<T>, Vec2<T>) {
        let s = s.max(T::ZERO).min(self.length());
        let seg = self.segment_at(s);
        let t = self.tangent(seg);
        (self.points[seg] + t * (s - self.cumulative[seg]), t)
    }

    pub fn heading_at(&self, s: T) -> T {
        self.sample(s).1.angle()
    }

    /// Nearest-point projection. `s` is clamped to `[0, length]`, `|d|` is the
    /// distance to the projected point and positive on the left.
    pub fn project(&self, p: Vec2<T>) -> FrenetPoint<T> {
        let mut best_dist = T::infinity();
        let mut best = FrenetPoint::new(T::ZERO, T::ZERO);
        for seg in 0..self.points.len() - 1 {
            let a = self.points[seg];
            let seg_len = self.cumulative[seg + 1] - self.cumulative[seg];
            let t = self.tangent(seg);
            let along = (p - a).dot(t).max(T::ZERO).min(seg_len);
            let foot = a + t * along;
            let dist = p.dist(foot);
            if dist < best_dist {
                best_dist = dist;
                let side = cross(t, p - foot);
                let d = if side < T::ZERO { -dist } else { dist };
                best = FrenetPoint::new(self.cumulative[seg] + along, d);
            }
        }
        best
    }

    /// Inverse of [`Polyline::project`] for points on the normal of a segment.
    pub fn to_cartesian(&self, f: FrenetPoint<T>) -> Result<Pose2D<T>, PolylineError> {
        if !(f.s >= T::ZERO && f.s <= self.length()) {
            return Err(PolylineError::OutOfRange {
                s: f.s.as_f64(),
                length: self.length().as_f64(),
            });
        }
        let (p, t) = self.sample(f.s);
        let q = p + t.perp() * f.d;
        Ok(Pose2D::new(q.x, q.y, t.angle()))
    }

    /// Frenet bounding interval of a box's corners.
    pub fn box_extent(&self, b: &OrientedBox<T>) -> FrenetExtent<T> {
        let mut e = FrenetExtent {
            s_min: T::infinity(),
            s_max: T::neg_infinity(),
            d_min: T::infinity(),
            d_max: T::neg_infinity(),
        };
        for c in b.corners() {
            let f = self.project(c);
            e.s_min = e.s_min.min(f.s);
            e.s_max = e.s_max.max(f.s);
            e.d_min = e.d_min.min(f.d);
            e.d_max = e.d_max.max(f.d);
        }
        e
    }

    /// Same geometry, traversed the other way.
    pub fn reversed(&self) -> Self {
        let mut pts = self.points.clone();
        pts.reverse();
        Self::new(pts).expect("reversal preserves validity")
    }

    /// Polyline shifted laterally by `d` (left positive), vertex normals averaged.
    pub fn offset(&self, d: T) -> Result<Self, PolylineError> {
        let n = self.points.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let normal = if i == 0 {
                self.tangent(0).perp()
            } else if i == n - 1 {
                self.tangent(n - 2).perp()
            } else {
                let m = self.tangent(i - 1) + self.tangent(i);
                let m = m * (T::ONE / m.norm());
                // miter: both adjacent edges move by exactly d
                let c = m.dot(self.tangent(i)).max(T::lit(0.2));
                m.perp() * (T::ONE / c)
            };
            out.push(self.points[i] + normal * d);
        }
        Self::new(out)
    }
}

/// Largest coordinate error of an embed-then-project round trip.
pub fn round_trip_error<T: Scalar>(line: &Polyline<T>, f: FrenetPoint<T>) -> Option<T> {
    let pose = line.to_cartesian(f).ok()?;
    let g = line.project(pose.position());
    Some((g.s - f.s).abs().max((g.d - f.d).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn east(len: f64) -> Polyline<f64> {
        Polyline::new(vec![Vec2::new(0.0, 0.0), Vec2::new(len, 0.0)]).unwrap()
    }

    #[test]
    fn rejects_degenerate_input() {
        assert_eq!(
            Polyline::<f64>::new(vec![Vec2::new(0.0, 0.0)]).unwrap_err(),
            PolylineError::TooFewPoints(1)
        );
        assert!(matches!(
            Polyline::new(vec![Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0)]),
            Err(PolylineError::RepeatedPoint(0, 1))
        ));
    }

    #[test]
    fn on_line_midpoint() {
        let l = east(10.0);
        let f = l.project(Vec2::new(5.0, 0.0));
        assert_eq!(f, FrenetPoint::new(5.0, 0.0));
    }

    #[test]
    fn left_offset_is_positive() {
        let l = east(10.0);
        let f = l.project(Vec2::new(5.0, 1.0));
        assert_eq!(f, FrenetPoint::new(5.0, 1.0));
        assert_eq!(l.project(Vec2::new(5.0, -1.0)).d, -1.0);
    }

    #[test]
    fn past_final_vertex_clamps() {
        // Oracle: brute-force min distance over densely sampled arc positions.
        let l = Polyline::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(10.0, 0.0),
            Vec2::new(10.0, 10.0),
        ])
        .unwrap();
        let p = Vec2::new(13.0, 14.0);
        let f = l.project(p);
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=200_000 {
            let s = l.length() * i as f64 / 200_000.0;
            let d = l.sample(s).0.dist(p);
            if d < best.0 {
                best = (d, s);
            }
        }
        assert!((f.s - 20.0).abs() < 1e-12);
        assert!((f.s - best.1).abs() < 1e-3);
        assert!((f.d.abs() - best.0).abs() < 1e-9);
        assert!((f.d.abs() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn cartesian_examples() {
        let l = east(10.0);
        let p = l.to_cartesian(FrenetPoint::new(0.0, 0.0)).unwrap();
        assert_eq!((p.x, p.y, p.heading), (0.0, 0.0, 0.0));
        let p = l.to_cartesian(FrenetPoint::new(3.0, 2.0)).unwrap();
        assert_eq!((p.x, p.y, p.heading), (3.0, 2.0, 0.0));
        assert!(l.to_cartesian(FrenetPoint::new(10.5, 0.0)).is_err());
        assert!(l.to_cartesian(FrenetPoint::new(-0.1, 0.0)).is_err());
    }

    #[test]
    fn arc_offset_lands_on_concentric_circle() {
        // Oracle: closed-form circle geometry. CCW arc, radius 50, 0.5 deg spacing.
        let r = 50.0;
        let pts: Vec<_> = (0..=180)
            .map(|i| {
                let a = (i as f64).to_radians() * 0.5;
                Vec2::new(r * a.cos(), r * a.sin())
            })
            .collect();
        let l = Polyline::new(pts).unwrap();
        let chord_half = (0.25f64).to_radians();
        for k in [10usize, 57, 120] {
            // chord midpoints: normal is exactly radial there
            let s = l.cumulative()[k] + 0.5 * (l.cumulative()[k + 1] - l.cumulative()[k]);
            let p = l.to_cartesian(FrenetPoint::new(s, 1.0)).unwrap();
            let radius = p.position().norm();
            assert!((radius - (r * chord_half.cos() - 1.0)).abs() < 1e-9);
            assert!((radius - (r - 1.0)).abs() < 1e-3);
        }
    }
}

use serde::{Deserialize, Serialize};

use super::{OrientedBox, Vec2};
use crate::scalar::Scalar;

/// Simple polygon (no self intersections), vertices in either winding order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon<T> {
    pub vertices: Vec<Vec2<T>>,
}

impl<T: Scalar> Polygon<T> {
    pub fn new(vertices: Vec<Vec2<T>>) -> Self {
        Self { vertices }
    }

    /// Axis-aligned rectangle helper.
    pub fn rect(min: Vec2<T>, max: Vec2<T>) -> Self {
        Self::new(vec![
            min,
            Vec2::new(max.x, min.y),
            max,
            Vec2::new(min.x, max.y),
        ])
    }

    pub fn bounds(&self) -> (Vec2<T>, Vec2<T>) {
        let mut lo = Vec2::new(T::infinity(), T::infinity());
        let mut hi = Vec2::new(T::neg_infinity(), T::neg_infinity());
        for v in &self.vertices {
            lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        (lo, hi)
    }

    /// Even-odd containment.
    pub fn contains(&self, p: Vec2<T>) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[j];
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }
}

/// Fraction of the box area outside the union of `area`, sampled on an
/// `n x n` grid of cell centers.
pub fn fraction_outside_drivable_grid<T: Scalar>(
    b: &OrientedBox<T>,
    area: &[Polygon<T>],
    n: usize,
) -> T {
    let n = n.max(1);
    let r = b.radius();
    let c = b.center.position();
    let near: Vec<(&Polygon<T>, (Vec2<T>, Vec2<T>))> = area
        .iter()
        .map(|poly| (poly, poly.bounds()))
        .filter(|(_, (lo, hi))| {
            c.x + r >= lo.x && c.x - r <= hi.x && c.y + r >= lo.y && c.y - r <= hi.y
        })
        .collect();
    if near.is_empty() {
        return T::ONE;
    }
    let inside_any = |p: Vec2<T>| {
        near.iter().any(|(poly, (lo, hi))| {
            p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && poly.contains(p)
        })
    };
    let nf = T::from_usize(n).expect("grid size");
    let mut outside = 0usize;
    for i in 0..n {
        let u = (T::from_usize(i).unwrap() + T::HALF) / nf - T::HALF;
        for j in 0..n {
            let v = (T::from_usize(j).unwrap() + T::HALF) / nf - T::HALF;
            let p = b.center.to_world(Vec2::new(u * b.length, v * b.width));
            if !inside_any(p) {
                outside += 1;
            }
        }
    }
    T::from_usize(outside).unwrap() / (nf * nf)
}

/// Metric-grade drivable-area check (32 x 32 samples).
pub fn fraction_outside_drivable<T: Scalar>(b: &OrientedBox<T>, area: &[Polygon<T>]) -> T {
    fraction_outside_drivable_grid(b, area, super::DRIVABLE_GRID)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose2D;

    fn road() -> Vec<Polygon<f64>> {
        vec![Polygon::rect(Vec2::new(0.0, -5.0), Vec2::new(100.0, 5.0))]
    }

    #[test]
    fn fully_inside_and_outside() {
        let inside = OrientedBox::new(Pose2D::new(50.0, 0.0, 0.3), 4.0, 2.0);
        assert_eq!(fraction_outside_drivable(&inside, &road()), 0.0);
        let outside = OrientedBox::new(Pose2D::new(50.0, 40.0, 0.3), 4.0, 2.0);
        assert_eq!(fraction_outside_drivable(&outside, &road()), 1.0);
    }

    #[test]
    fn straddling_boundary_is_half() {
        // Oracle: analytic half-area.
        let b = OrientedBox::new(Pose2D::new(50.0, 5.0, 0.0), 4.0, 2.0);
        let f = fraction_outside_drivable(&b, &road());
        assert!((f - 0.5).abs() <= 0.02, "{f}");
        let rotated = OrientedBox::new(Pose2D::new(50.0, 5.0, 0.4), 4.0, 2.0);
        let f = fraction_outside_drivable(&rotated, &road());
        assert!((f - 0.5).abs() <= 0.02, "{f}");
    }

    #[test]
    fn union_of_polygons() {
        let area = vec![
            Polygon::rect(Vec2::new(0.0, 0.0), Vec2::new(10.0, 10.0)),
            Polygon::rect(Vec2::new(10.0, 0.0), Vec2::new(20.0, 10.0)),
        ];
        let b = OrientedBox::new(Pose2D::new(10.0, 5.0, 0.0), 4.0, 2.0);
        assert_eq!(fraction_outside_drivable(&b, &area), 0.0);
    }

    #[test]
    fn concave_polygon_containment() {
        let l_shape = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(10.0, 0.0),
            Vec2::new(10.0, 2.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(2.0, 10.0),
            Vec2::new(0.0, 10.0),
        ]);
        assert!(l_shape.contains(Vec2::new(1.0, 9.0)));
        assert!(l_shape.contains(Vec2::new(9.0, 1.0)));
        assert!(!l_shape.contains(Vec2::new(5.0, 5.0)));
    }
}

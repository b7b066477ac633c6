use serde::{Deserialize, Serialize};

use super::{Pose2D, Vec2};
use crate::scalar::Scalar;

/// Rectangle centered on `center`, long side along the heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox<T> {
    pub center: Pose2D<T>,
    pub length: T,
    pub width: T,
}

impl<T: Scalar> OrientedBox<T> {
    /// Panics on non-positive extents; boxes are always built from validated specs.
    pub fn new(center: Pose2D<T>, length: T, width: T) -> Self {
        assert!(
            length > T::ZERO && width > T::ZERO,
            "box extents must be positive"
        );
        Self {
            center,
            length,
            width,
        }
    }

    /// Corners counterclockwise, starting front-left.
    pub fn corners(&self) -> [Vec2<T>; 4] {
        let hl = self.length * T::HALF;
        let hw = self.width * T::HALF;
        [
            self.center.to_world(Vec2::new(hl, hw)),
            self.center.to_world(Vec2::new(-hl, hw)),
            self.center.to_world(Vec2::new(-hl, -hw)),
            self.center.to_world(Vec2::new(hl, -hw)),
        ]
    }

    /// Half the diagonal; no corner is farther from the center.
    pub fn radius(&self) -> T {
        (self.length * T::HALF).hypot(self.width * T::HALF)
    }

    /// Point containment, boundary inclusive.
    pub fn contains(&self, p: Vec2<T>) -> bool {
        let l = self.center.to_local(p);
        l.x.abs() <= self.length * T::HALF && l.y.abs() <= self.width * T::HALF
    }

    /// The forward (`front = true`) or rear half of the box.
    pub fn half(&self, front: bool) -> Self {
        let q = self.length * T::lit(0.25);
        let shift = if front { q } else { -q };
        Self {
            center: self.center.offset(shift, T::ZERO),
            length: self.length * T::HALF,
            width: self.width,
        }
    }

    pub fn with_center(&self, center: Pose2D<T>) -> Self {
        Self { center, ..*self }
    }

    fn axes(&self) -> [Vec2<T>; 2] {
        let d = self.center.direction();
        [d, d.perp()]
    }
}

fn project<T: Scalar>(corners: &[Vec2<T>; 4], axis: Vec2<T>) -> (T, T) {
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for c in corners {
        let p = c.dot(axis);
        lo = lo.min(p);
        hi = hi.max(p);
    }
    (lo, hi)
}

/// Separating-axis test over the four edge normals. Touching counts as contact.
pub fn boxes_collide<T: Scalar>(a: &OrientedBox<T>, b: &OrientedBox<T>) -> bool {
    let reach = a.radius() + b.radius();
    if a.center.position().dist(b.center.position()) > reach {
        return false;
    }
    let ca = a.corners();
    let cb = b.corners();
    for axis in a.axes().into_iter().chain(b.axes()) {
        let (alo, ahi) = project(&ca, axis);
        let (blo, bhi) = project(&cb, axis);
        if ahi < blo || bhi < alo {
            return false;
        }
    }
    true
}

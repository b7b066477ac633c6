//! Numeric abstraction for the geometry and car-following kernels.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type usable by the geometric and IDM kernels.
///
/// Implemented for `f32` and `f64`; the simulator itself runs on `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Default + Send + Sync + 'static
{
    const ZERO: Self;
    const ONE: Self;
    const TWO: Self;
    const HALF: Self;
    const PI: Self;
    const TWO_PI: Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_scalar {
    ($t:ident) => {
        impl Scalar for $t {
            const ZERO: Self = 0.0;
            const ONE: Self = 1.0;
            const TWO: Self = 2.0;
            const HALF: Self = 0.5;
            const PI: Self = std::$t::consts::PI;
            const TWO_PI: Self = std::$t::consts::TAU;
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle<T: Scalar>(a: T) -> T {
    if !a.is_finite() {
        return a;
    }
    let mut r = a % T::TWO_PI;
    if r <= -T::PI {
        r = r + T::TWO_PI;
    } else if r > T::PI {
        r = r - T::TWO_PI;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_wraps_into_half_open_interval() {
        let pi = std::f64::consts::PI;
        assert_eq!(normalize_angle(pi), pi);
        assert!((normalize_angle(-pi) - pi).abs() < 1e-12);
        assert!((normalize_angle(3.0 * pi) - pi).abs() < 1e-9);
        assert!((normalize_angle(0.5f32) - 0.5).abs() < 1e-7);
        assert!((normalize_angle(-7.0) - (-7.0 + 2.0 * pi)).abs() < 1e-12);
    }
}

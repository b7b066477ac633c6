//! Intelligent Driver Model car-following law.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Hard floor on any IDM output, m/s^2.
pub const EMERGENCY_DECEL: f64 = -8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdmParams<T> {
    /// Desired speed, m/s.
    pub desired_speed: T,
    /// Desired time headway, s.
    pub time_headway: T,
    /// Jam (standstill) distance, m.
    pub jam_distance: T,
    pub max_accel: T,
    pub comfort_decel: T,
    /// Acceleration exponent.
    pub delta: T,
}

impl IdmParams<f64> {
    /// Canonical parameter set with the given desired speed.
    pub fn with_desired_speed(v0: f64) -> Self {
        Self {
            desired_speed: v0,
            time_headway: 1.5,
            jam_distance: 4.0,
            max_accel: 1.5,
            comfort_decel: 2.0,
            delta: 4.0,
        }
    }
}

impl<T: Scalar> IdmParams<T> {
    pub fn is_valid(&self) -> bool {
        let pos = |x: T| x > T::ZERO && x.is_finite();
        pos(self.desired_speed)
            && pos(self.time_headway)
            && pos(self.jam_distance)
            && pos(self.max_accel)
            && pos(self.comfort_decel)
            && self.delta >= T::ONE
    }

    /// Desired dynamic gap `s*` for speed `v` and approach rate `dv = v - v_lead`.
    pub fn desired_gap(&self, v: T, dv: T) -> T {
        self.jam_distance
            + v * self.time_headway
            + v * dv / (T::TWO * (self.max_accel * self.comfort_decel).sqrt())
    }

    /// Steady-state gap at speed `v` behind a lead moving at the same speed.
    pub fn equilibrium_gap(&self, v: T) -> T {
        let x = (v / self.desired_speed).powf(self.delta);
        if x >= T::ONE {
            return T::infinity();
        }
        (self.jam_distance + v * self.time_headway) / (T::ONE - x).sqrt()
    }

    /// Speed at which `gap` is the steady-state gap; bisection on the
    /// monotone equilibrium relation.
    pub fn equilibrium_speed(&self, gap: T) -> T {
        if gap <= self.jam_distance {
            return T::ZERO;
        }
        let (mut lo, mut hi) = (T::ZERO, self.desired_speed);
        for _ in 0..80 {
            let mid = (lo + hi) * T::HALF;
            if self.equilibrium_gap(mid) < gap {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("gap to lead must be positive, got {0}")]
pub struct NonPositiveGap(pub f64);

/// Free-road and interaction terms, unclamped: `a = free + interaction`.
pub fn idm_terms<T: Scalar>(
    v: T,
    lead: Option<(T, T)>,
    p: &IdmParams<T>,
) -> Result<(T, T), NonPositiveGap> {
    let free = p.max_accel * (T::ONE - (v.max(T::ZERO) / p.desired_speed).powf(p.delta));
    let interaction = match lead {
        None => T::ZERO,
        Some((v_lead, gap)) => {
            if !(gap > T::ZERO) {
                return Err(NonPositiveGap(gap.as_f64()));
            }
            let s_star = p.desired_gap(v, v - v_lead).max(T::ZERO);
            let r = s_star / gap;
            -p.max_accel * r * r
        }
    };
    Ok((free, interaction))
}

/// IDM acceleration, clamped below at [`EMERGENCY_DECEL`]. `lead` is
/// `(lead speed, bumper-to-bumper gap)`.
pub fn idm_acceleration<T: Scalar>(
    v: T,
    lead: Option<(T, T)>,
    p: &IdmParams<T>,
) -> Result<T, NonPositiveGap> {
    let (free, interaction) = idm_terms(v, lead, p)?;
    Ok((free + interaction).max(T::lit(EMERGENCY_DECEL)).min(p.max_accel))
}

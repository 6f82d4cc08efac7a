//! Two-sample closed forms for the per-interval integrals driven by gyro and
//! accelerometer increments.
//!
//! All three kernels assume the angular rate and specific force vary linearly
//! across the update interval and that the two samples split it exactly in
//! half.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the total rotation within one update interval (rad).
pub const MAX_INTERVAL_ROTATION: f64 = 0.1;

/// Gyro and accelerometer increments over the two halves of one update
/// interval.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ImuInterval {
    pub dtheta1: Vector3<f64>,
    pub dtheta2: Vector3<f64>,
    pub dv1: Vector3<f64>,
    pub dv2: Vector3<f64>,
}

impl ImuInterval {
    pub fn new(
        dtheta1: Vector3<f64>,
        dtheta2: Vector3<f64>,
        dv1: Vector3<f64>,
        dv2: Vector3<f64>,
    ) -> Self {
        Self {
            dtheta1,
            dtheta2,
            dv1,
            dv2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.dtheta1, self.dtheta2, self.dv1, self.dv2]
            .iter()
            .all(|v| v.iter().all(|c| c.is_finite()));
        if !finite {
            return Err(Error::InvalidInput("non-finite IMU increment".into()));
        }
        let rot = (self.dtheta1 + self.dtheta2).norm();
        if rot >= MAX_INTERVAL_ROTATION {
            return Err(Error::InvalidInput(format!(
                "interval rotation {rot} rad exceeds {MAX_INTERVAL_ROTATION}"
            )));
        }
        Ok(())
    }
}

/// `int (I + (int omega) x) f dt` over the interval (velocity increment with
/// rotation and sculling compensation).
pub fn sculling_increment(s: &ImuInterval) -> Vector3<f64> {
    let dth = s.dtheta1 + s.dtheta2;
    let dv = s.dv1 + s.dv2;
    dv + dth.cross(&dv) * 0.5 + (s.dtheta1.cross(&s.dv2) + s.dv1.cross(&s.dtheta2)) * (2.0 / 3.0)
}

/// Double integral `int int (I + (int omega) x) f` over an interval of length
/// `interval`.
pub fn double_integral_increment(s: &ImuInterval, interval: f64) -> Vector3<f64> {
    let (t1, t2, v1, v2) = (&s.dtheta1, &s.dtheta2, &s.dv1, &s.dv2);
    (v1 * 25.0
        + v2 * 5.0
        + t1.cross(v1) * 12.0
        + t1.cross(v2) * 8.0
        + v1.cross(t2) * 2.0
        + t2.cross(v2) * 2.0)
        * (interval / 30.0)
}

/// Body rotation vector with two-sample coning correction.
pub fn body_rotvec(s: &ImuInterval) -> Vector3<f64> {
    s.dtheta1 + s.dtheta2 + s.dtheta1.cross(&s.dtheta2) * (2.0 / 3.0)
}

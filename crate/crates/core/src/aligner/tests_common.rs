//! Stationary scenario with exact increments, shared by the aligner tests.

use nalgebra::Vector3;

use super::{AidFix, Aligner, AttitudeEstimate};
use crate::attitude::{euler_to_dcm, Dcm, EulerAngles};
use crate::earth::{earth_rate_n, gravity_n, GeodeticPosition, NavVelocity};
use crate::increments::ImuInterval;

pub struct StaticCase {
    pub position: GeodeticPosition,
    pub attitude: Dcm,
    pub interval: f64,
}

impl Default for StaticCase {
    fn default() -> Self {
        Self {
            position: GeodeticPosition::new(0.3, 30f64.to_radians(), 120.0).unwrap(),
            attitude: euler_to_dcm(&EulerAngles::new(0.05, -0.03, 0.7)),
            interval: 0.02,
        }
    }
}

impl StaticCase {
    pub fn fix(&self, k: u64) -> AidFix {
        AidFix {
            t: k as f64 * self.interval,
            v: NavVelocity::default(),
            p: self.position,
        }
    }

    /// Constant body rate and specific force, split into two half samples.
    pub fn interval_data(&self, k: u64) -> (ImuInterval, AidFix, AidFix) {
        let c_n_b = self.attitude.transpose();
        let omega: Vector3<f64> = c_n_b * earth_rate_n(self.position.lat);
        let f: Vector3<f64> = c_n_b * (-gravity_n(&self.position));
        let half = self.interval / 2.0;
        let imu = ImuInterval::new(omega * half, omega * half, f * half, f * half);
        (imu, self.fix(k), self.fix(k + 1))
    }
}

/// Runs `n` updates and returns the final estimate and the true `C_b^n(0)`.
pub fn static_run<A: Aligner>(a: &mut A, case: &StaticCase, n: u64) -> (AttitudeEstimate, Dcm) {
    for k in 0..n {
        let (imu, f0, f1) = case.interval_data(k);
        a.accumulate(&imu, &f0, &f1).unwrap();
    }
    (a.estimate().unwrap(), case.attitude)
}

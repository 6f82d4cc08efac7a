//! Position-integration formulation.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{AidFix, Aligner, Chains};
use crate::earth::{GeodeticPosition, NavVelocity};
use crate::error::Result;
use crate::increments::{double_integral_increment, sculling_increment, ImuInterval};

/// Observation pair from the twice-integrated velocity equation. Every
/// double integral is split into an in-interval part plus `T` times a running
/// single-integral prefix sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PifAligner {
    chains: Chains,
    alpha: Vector3<f64>,
    /// Body-side single integral (the velocity aligner's `alpha`).
    body_single: Vector3<f64>,
    /// `int C_{n(t)}^{n(0)} v dt`
    velocity_integral: Vector3<f64>,
    coriolis_double: Vector3<f64>,
    coriolis_single: Vector3<f64>,
    gravity_double: Vector3<f64>,
    gravity_single: Vector3<f64>,
}

impl PifAligner {
    pub fn new(v0: NavVelocity, p0: GeodeticPosition, interval: f64) -> Result<Self> {
        let chains = Chains::new(v0, p0, interval)?;
        let z = Vector3::zeros();
        Ok(Self {
            chains,
            alpha: z,
            body_single: z,
            velocity_integral: z,
            coriolis_double: z,
            coriolis_single: z,
            gravity_double: z,
            gravity_single: z,
        })
    }

    pub fn alpha(&self) -> Vector3<f64> {
        self.alpha
    }

    pub fn beta(&self) -> Vector3<f64> {
        self.velocity_integral - self.chains.v0.0 * self.chains.elapsed() + self.coriolis_double
            - self.gravity_double
    }
}

impl Aligner for PifAligner {
    fn accumulate(&mut self, imu: &ImuInterval, prev: &AidFix, next: &AidFix) -> Result<()> {
        let terms = self.chains.interval_terms(imu, prev, next)?;
        let t = terms.t;
        let (nav_prev, body_prev) = self.chains.advance(imu, &terms);

        self.alpha += self.body_single * t + body_prev * double_integral_increment(imu, t);
        self.body_single += body_prev * sculling_increment(imu);

        self.velocity_integral += nav_prev * terms.velocity_single();
        self.coriolis_double += nav_prev * terms.coriolis_double() + self.coriolis_single * t;
        self.coriolis_single += nav_prev * terms.coriolis_single();
        self.gravity_double += nav_prev * terms.gravity_double() + self.gravity_single * t;
        self.gravity_single += nav_prev * terms.gravity_single();

        let (alpha, beta) = (self.alpha, self.beta());
        self.chains.k.accumulate(&alpha, &beta);
        Ok(())
    }

    fn chains(&self) -> &Chains {
        &self.chains
    }

    fn observation(&self) -> (Vector3<f64>, Vector3<f64>) {
        (self.alpha, self.beta())
    }
}

//! Velocity-integration formulation.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{AidFix, Aligner, Chains};
use crate::earth::{GeodeticPosition, NavVelocity};
use crate::error::Result;
use crate::increments::{sculling_increment, ImuInterval};

/// Observation pair from the integrated velocity equation:
/// `alpha = int C_{b(t)}^{b(0)} f dt`,
/// `beta = C_{n(t)}^{n(0)} v - v0 + int C_{n(t)}^{n(0)} (omega_ie x v - g) dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VifAligner {
    chains: Chains,
    alpha: Vector3<f64>,
    /// Integral part of `beta`.
    beta_integral: Vector3<f64>,
    v_last: Vector3<f64>,
}

impl VifAligner {
    pub fn new(v0: NavVelocity, p0: GeodeticPosition, interval: f64) -> Result<Self> {
        let chains = Chains::new(v0, p0, interval)?;
        Ok(Self {
            chains,
            alpha: Vector3::zeros(),
            beta_integral: Vector3::zeros(),
            v_last: v0.0,
        })
    }

    pub fn alpha(&self) -> Vector3<f64> {
        self.alpha
    }

    pub fn beta(&self) -> Vector3<f64> {
        self.chains.nav * self.v_last - self.chains.v0.0 + self.beta_integral
    }
}

impl Aligner for VifAligner {
    fn accumulate(&mut self, imu: &ImuInterval, prev: &AidFix, next: &AidFix) -> Result<()> {
        let terms = self.chains.interval_terms(imu, prev, next)?;
        let (nav_prev, body_prev) = self.chains.advance(imu, &terms);
        self.alpha += body_prev * sculling_increment(imu);
        self.beta_integral += nav_prev * (terms.coriolis_single() - terms.gravity_single());
        self.v_last = terms.v_next;
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

//! Recursive in-flight aligners.
//!
//! Both aligners keep the body and navigation frame changes since `t = 0` as
//! two chained DCMs, build an observation pair `(alpha, beta)` with
//! `C_b^n(0) alpha = beta` at every update, and fold it into a `K` matrix.
//! They differ in how many times the velocity equation is integrated.

mod pif;
#[cfg(test)]
mod tests_common;
mod vif;

pub use pif::PifAligner;
pub use vif::VifAligner;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::attitude::{compose_attitude, quat_to_dcm, rotvec_to_dcm, skew, Dcm, UnitQuaternion};
use crate::earth::{earth_rate_n, gravity_n, nav_rate_n, GeodeticPosition, NavVelocity};
use crate::error::{Error, Result};
use crate::increments::{body_rotvec, ImuInterval};
use crate::wahba::Kmatrix;

/// Allowed mismatch between fix spacing and the update interval (s).
const INTERVAL_TOLERANCE: f64 = 1e-6;

/// Aided velocity and position at one interval endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AidFix {
    pub t: f64,
    pub v: NavVelocity,
    pub p: GeodeticPosition,
}

/// Which integration formula drives the aligner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Vif,
    Pif,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Vif => "vif",
            Method::Pif => "pif",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vif" => Ok(Method::Vif),
            "pif" => Ok(Method::Pif),
            other => Err(Error::InvalidInput(format!(
                "unknown method '{other}' (expected vif or pif)"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of one eigen extraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttitudeEstimate {
    /// Elapsed alignment time `M T` (s).
    pub elapsed: f64,
    /// Quaternion encoding `C_n^b(0)`.
    pub q: UnitQuaternion,
    pub lambda_min: f64,
    /// `C_b^n(0)`.
    pub initial: Dcm,
    /// `C_b^n(t_M)`.
    pub current: Dcm,
}

/// Operations common to both aligners.
pub trait Aligner {
    /// Folds one update interval into the accumulators (no eigen solve).
    fn accumulate(&mut self, imu: &ImuInterval, prev: &AidFix, next: &AidFix) -> Result<()>;

    fn chains(&self) -> &Chains;

    /// Current observation pair `(alpha, beta)`.
    fn observation(&self) -> (Vector3<f64>, Vector3<f64>);

    /// Eigen extraction and current attitude. Fails with
    /// [`Error::DegenerateSpectrum`] while the attitude is unobservable.
    fn estimate(&self) -> Result<AttitudeEstimate> {
        self.chains().estimate()
    }

    /// Accumulate then estimate. The accumulators advance even when the
    /// estimate itself fails with a degenerate spectrum.
    fn update(
        &mut self,
        imu: &ImuInterval,
        prev: &AidFix,
        next: &AidFix,
    ) -> Result<AttitudeEstimate> {
        self.accumulate(imu, prev, next)?;
        self.estimate()
    }

    /// `|| C alpha - beta ||` for a given initial attitude `C = C_b^n(0)`.
    fn residual(&self, initial: &Dcm) -> f64 {
        let (alpha, beta) = self.observation();
        (initial * alpha - beta).norm()
    }
}

/// Shared aligner state: update count, the two frame chains, `K` and the
/// initial velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chains {
    pub updates: u64,
    pub interval: f64,
    /// `C_{n(t_M)}^{n(0)}`.
    pub nav: Dcm,
    /// `C_{b(t_M)}^{b(0)}`.
    pub body: Dcm,
    pub k: Kmatrix,
    pub v0: NavVelocity,
    pub p0: GeodeticPosition,
}

impl Chains {
    fn new(v0: NavVelocity, p0: GeodeticPosition, interval: f64) -> Result<Self> {
        if !(interval.is_finite() && interval > 0.0) {
            return Err(Error::InvalidInput(format!(
                "update interval must be positive, got {interval}"
            )));
        }
        if !v0.0.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidInput("non-finite initial velocity".into()));
        }
        Ok(Self {
            updates: 0,
            interval,
            nav: Dcm::identity(),
            body: Dcm::identity(),
            k: Kmatrix::zeros(),
            v0,
            p0,
        })
    }

    pub fn elapsed(&self) -> f64 {
        self.updates as f64 * self.interval
    }

    /// Validates inputs and evaluates the interval constants at the lower limit.
    fn interval_terms(
        &self,
        imu: &ImuInterval,
        prev: &AidFix,
        next: &AidFix,
    ) -> Result<IntervalTerms> {
        imu.validate()?;
        let dt = next.t - prev.t;
        if (dt - self.interval).abs() > INTERVAL_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "fixes {} s apart, update interval is {} s",
                dt, self.interval
            )));
        }
        let nav_rate = nav_rate_n(&prev.v, &prev.p)?;
        // also rejects the pole for the closing fix
        nav_rate_n(&next.v, &next.p)?;
        Ok(IntervalTerms {
            t: self.interval,
            nav_rate: skew(&nav_rate),
            nav_rotvec: nav_rate * self.interval,
            earth_rate: earth_rate_n(prev.p.lat),
            gravity: gravity_n(&prev.p),
            v_prev: prev.v.0,
            v_next: next.v.0,
        })
    }

    /// Steps the two chains; returns their values at the start of the interval.
    fn advance(&mut self, imu: &ImuInterval, terms: &IntervalTerms) -> (Dcm, Dcm) {
        let nav_prev = self.nav;
        let body_prev = self.body;
        self.nav = (nav_prev * rotvec_to_dcm(&terms.nav_rotvec)).repaired();
        self.body = (body_prev * rotvec_to_dcm(&body_rotvec(imu))).repaired();
        self.updates += 1;
        (nav_prev, body_prev)
    }

    fn estimate(&self) -> Result<AttitudeEstimate> {
        let (q, lambda_min) = self.k.optimal_quaternion()?;
        let initial = quat_to_dcm(&q).transpose();
        let current = compose_attitude(&self.nav.transpose(), &initial, &self.body);
        Ok(AttitudeEstimate {
            elapsed: self.elapsed(),
            q,
            lambda_min,
            initial,
            current,
        })
    }
}

/// Per-interval constants, all taken at the lower integration limit.
struct IntervalTerms {
    t: f64,
    /// `omega_in^n x`
    nav_rate: Matrix3<f64>,
    nav_rotvec: Vector3<f64>,
    earth_rate: Vector3<f64>,
    gravity: Vector3<f64>,
    v_prev: Vector3<f64>,
    v_next: Vector3<f64>,
}

impl IntervalTerms {
    /// `int_0^T (I + s W) x(s) ds` for `x` linear between the endpoint values.
    fn single_linear(&self, x0: &Vector3<f64>, x1: &Vector3<f64>) -> Vector3<f64> {
        let t = self.t;
        let w = &self.nav_rate;
        (x0 + x1) * (t / 2.0) + w * x0 * (t * t / 6.0) + w * x1 * (t * t / 3.0)
    }

    /// `int_0^T int_0^tau (I + s W) x(s) ds dtau` for linear `x`.
    fn double_linear(&self, x0: &Vector3<f64>, x1: &Vector3<f64>) -> Vector3<f64> {
        let t = self.t;
        let w = &self.nav_rate;
        x0 * (t * t / 3.0) + x1 * (t * t / 6.0) + w * (x0 + x1) * (t * t * t / 12.0)
    }

    fn coriolis_ends(&self) -> (Vector3<f64>, Vector3<f64>) {
        (
            self.earth_rate.cross(&self.v_prev),
            self.earth_rate.cross(&self.v_next),
        )
    }

    /// `int (I + s W) (omega_ie x v) ds`
    fn coriolis_single(&self) -> Vector3<f64> {
        let (a, b) = self.coriolis_ends();
        self.single_linear(&a, &b)
    }

    fn coriolis_double(&self) -> Vector3<f64> {
        let (a, b) = self.coriolis_ends();
        self.double_linear(&a, &b)
    }

    /// `int (I + s W) g ds`
    fn gravity_single(&self) -> Vector3<f64> {
        let t = self.t;
        self.gravity * t + self.nav_rate * self.gravity * (t * t / 2.0)
    }

    fn gravity_double(&self) -> Vector3<f64> {
        let t = self.t;
        self.gravity * (t * t / 2.0) + self.nav_rate * self.gravity * (t * t * t / 6.0)
    }

    /// `int (I + s W) v ds`
    fn velocity_single(&self) -> Vector3<f64> {
        self.single_linear(&self.v_prev, &self.v_next)
    }
}

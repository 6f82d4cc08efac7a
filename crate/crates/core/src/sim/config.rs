use std::f64::consts::TAU;
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::earth::{GeodeticPosition, STANDARD_GRAVITY};
use crate::error::{Error, Result};

/// `mean + amplitude * sin(2 pi t / period + phase)`. Phase in degrees; the
/// other fields carry the unit of the quantity being modulated.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Oscillation {
    pub mean: f64,
    pub amplitude: f64,
    pub period: f64,
    pub phase: f64,
}

impl Oscillation {
    pub const fn new(mean: f64, amplitude: f64, period: f64, phase: f64) -> Self {
        Self {
            mean,
            amplitude,
            period,
            phase,
        }
    }

    pub const fn constant(mean: f64) -> Self {
        Self::new(mean, 0.0, 0.0, 0.0)
    }

    fn angular_frequency(&self) -> f64 {
        if self.amplitude == 0.0 {
            0.0
        } else {
            TAU / self.period
        }
    }

    /// Value and first two time derivatives.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let w = self.angular_frequency();
        if w == 0.0 {
            return (self.mean, 0.0, 0.0);
        }
        let (s, c) = (w * t + self.phase.to_radians()).sin_cos();
        let a = self.amplitude;
        (self.mean + a * s, a * w * c, -a * w * w * s)
    }

    fn validate(&self, what: &str) -> Result<()> {
        let finite = [self.mean, self.amplitude, self.period, self.phase]
            .iter()
            .all(|v| v.is_finite());
        if !finite || (self.amplitude != 0.0 && self.period <= 0.0) {
            return Err(Error::Config(format!(
                "{what}: oscillation needs finite values and a positive period"
            )));
        }
        Ok(())
    }
}

/// Euler angle profiles (deg).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttitudeProfile {
    pub roll: Oscillation,
    pub pitch: Oscillation,
    pub yaw: Oscillation,
}

/// N-U-E velocity profiles (m/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VelocityProfile {
    pub north: Oscillation,
    pub up: Oscillation,
    pub east: Oscillation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialPosition {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub height: f64,
}

impl Default for InitialPosition {
    fn default() -> Self {
        Self {
            lat_deg: 30.0,
            lon_deg: 0.0,
            height: 0.0,
        }
    }
}

impl InitialPosition {
    pub fn to_position(&self) -> Result<GeodeticPosition> {
        GeodeticPosition::new(
            self.lon_deg.to_radians(),
            self.lat_deg.to_radians(),
            self.height,
        )
    }
}

/// Trajectory and timing of one simulated flight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub position: InitialPosition,
    pub attitude: AttitudeProfile,
    pub velocity: VelocityProfile,
    /// Flight length (s).
    pub duration: f64,
    /// IMU sample rate (Hz).
    pub imu_rate: f64,
    /// Alignment update interval `T` (s).
    pub interval: f64,
    /// Aiding fix rate (Hz); absent means one fix per update endpoint.
    pub gps_rate: Option<f64>,
}

impl Default for AttitudeProfile {
    fn default() -> Self {
        Self {
            roll: Oscillation::new(0.0, 15.0, 120.0, 0.0),
            pitch: Oscillation::new(0.0, 10.0, 100.0, 45.0),
            yaw: Oscillation::new(30.0, 40.0, 60.0, 0.0),
        }
    }
}

impl Default for VelocityProfile {
    fn default() -> Self {
        Self {
            north: Oscillation::new(80.0, 20.0, 50.0, 0.0),
            up: Oscillation::new(0.0, 3.0, 40.0, 0.0),
            east: Oscillation::new(40.0, 20.0, 70.0, 0.0),
        }
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            position: InitialPosition::default(),
            attitude: AttitudeProfile::default(),
            velocity: VelocityProfile::default(),
            duration: 300.0,
            imu_rate: 100.0,
            interval: 0.02,
            gps_rate: None,
        }
    }
}

impl ScenarioConfig {
    /// Stationary vehicle at the default position with the given attitude (deg).
    pub fn stationary(roll: f64, pitch: f64, yaw: f64, duration: f64) -> Self {
        Self {
            attitude: AttitudeProfile {
                roll: Oscillation::constant(roll),
                pitch: Oscillation::constant(pitch),
                yaw: Oscillation::constant(yaw),
            },
            velocity: VelocityProfile {
                north: Oscillation::default(),
                up: Oscillation::default(),
                east: Oscillation::default(),
            },
            duration,
            ..Self::default()
        }
    }

    /// IMU samples per update interval.
    pub fn samples_per_update(&self) -> Result<usize> {
        let n = self.imu_rate * self.interval;
        let rounded = n.round();
        if (n - rounded).abs() > 1e-9 || rounded < 2.0 || !(rounded as usize).is_multiple_of(2) {
            return Err(Error::RateMismatch {
                imu_rate: self.imu_rate,
                interval: self.interval,
            });
        }
        Ok(rounded as usize)
    }

    pub fn updates(&self) -> usize {
        (self.duration / self.interval).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::Config(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if !(self.interval.is_finite() && self.interval > 0.0) {
            return Err(Error::Config(format!(
                "interval must be positive, got {}",
                self.interval
            )));
        }
        if self.updates() == 0 {
            return Err(Error::Config(
                "duration shorter than one update interval".into(),
            ));
        }
        self.samples_per_update()?;
        if let Some(rate) = self.gps_rate {
            let per_fix = 1.0 / (rate * self.interval);
            if !(rate > 0.0 && (per_fix - per_fix.round()).abs() < 1e-9 && per_fix.round() >= 1.0) {
                return Err(Error::Config(format!(
                    "gps_rate {rate} Hz must divide the update rate {} Hz",
                    1.0 / self.interval
                )));
            }
        }
        self.position.to_position()?;
        for (name, o) in [
            ("roll", self.attitude.roll),
            ("pitch", self.attitude.pitch),
            ("yaw", self.attitude.yaw),
            ("north", self.velocity.north),
            ("up", self.velocity.up),
            ("east", self.velocity.east),
        ] {
            o.validate(name)?;
        }
        Ok(())
    }

    /// Update intervals between consecutive aiding fixes.
    pub fn updates_per_fix(&self) -> usize {
        match self.gps_rate {
            Some(rate) => (1.0 / (rate * self.interval)).round() as usize,
            None => 1,
        }
    }
}

/// How constant sensor biases are chosen for each run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasMode {
    /// The stated magnitude on every axis, identical for all runs.
    #[default]
    Fixed,
    /// Each axis drawn once per run from a zero-mean normal with the stated
    /// magnitude as standard deviation.
    Random,
}

/// Sensor error magnitudes in datasheet units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorErrors {
    /// deg/h
    pub gyro_drift: f64,
    /// deg/h/sqrt(Hz)
    pub gyro_noise_psd: f64,
    /// micro-g
    pub accel_bias: f64,
    /// micro-g/sqrt(Hz)
    pub accel_noise_psd: f64,
    /// m/s, one standard deviation per axis
    pub gps_vel_sigma: f64,
    /// m, one standard deviation per axis
    pub gps_pos_sigma: f64,
    /// Antenna position in the body frame (m).
    pub lever_arm: [f64; 3],
    pub bias_mode: BiasMode,
    pub rng_seed: u64,
}

impl Default for SensorErrors {
    fn default() -> Self {
        Self {
            gyro_drift: 0.01,
            gyro_noise_psd: 0.1,
            accel_bias: 50.0,
            accel_noise_psd: 500.0,
            gps_vel_sigma: 0.1,
            gps_pos_sigma: 2.0,
            lever_arm: [1.0, 1.0, 1.0],
            bias_mode: BiasMode::Fixed,
            rng_seed: 1,
        }
    }
}

const DEG_PER_HOUR: f64 = std::f64::consts::PI / 180.0 / 3600.0;

impl SensorErrors {
    /// No errors of any kind.
    pub fn ideal() -> Self {
        Self {
            gyro_drift: 0.0,
            gyro_noise_psd: 0.0,
            accel_bias: 0.0,
            accel_noise_psd: 0.0,
            gps_vel_sigma: 0.0,
            gps_pos_sigma: 0.0,
            lever_arm: [0.0; 3],
            bias_mode: BiasMode::Fixed,
            rng_seed: 0,
        }
    }

    pub fn without_lever_arm(mut self) -> Self {
        self.lever_arm = [0.0; 3];
        self
    }

    pub fn lever_arm(&self) -> Vector3<f64> {
        Vector3::from(self.lever_arm)
    }

    pub fn gyro_drift_si(&self) -> f64 {
        self.gyro_drift * DEG_PER_HOUR
    }

    /// rad/sqrt(s)
    pub fn gyro_noise_si(&self) -> f64 {
        self.gyro_noise_psd * DEG_PER_HOUR
    }

    pub fn accel_bias_si(&self) -> f64 {
        self.accel_bias * 1e-6 * STANDARD_GRAVITY
    }

    /// m/s/sqrt(s)
    pub fn accel_noise_si(&self) -> f64 {
        self.accel_noise_psd * 1e-6 * STANDARD_GRAVITY
    }

    pub fn validate(&self) -> Result<()> {
        let mags = [
            self.gyro_drift,
            self.gyro_noise_psd,
            self.accel_bias,
            self.accel_noise_psd,
            self.gps_vel_sigma,
            self.gps_pos_sigma,
        ];
        if mags.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::Config(
                "sensor error magnitudes must be finite and non-negative".into(),
            ));
        }
        if self.lever_arm.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("lever arm must be finite".into()));
        }
        Ok(())
    }
}

/// Scenario plus sensor errors, as stored in a config file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub scenario: ScenarioConfig,
    pub sensors: SensorErrors,
}

impl SimConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.sensors.validate()
    }

    /// SHA-256 of the canonical TOML serialization.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillation_derivatives() {
        let o = Oscillation::new(1.0, 2.0, 8.0, 30.0);
        let h = 1e-5;
        let (x, dx, ddx) = o.eval(1.3);
        let (xp, dxp, _) = o.eval(1.3 + h);
        let (xm, dxm, _) = o.eval(1.3 - h);
        assert!(((xp - xm) / (2.0 * h) - dx).abs() < 1e-8);
        assert!(((dxp - dxm) / (2.0 * h) - ddx).abs() < 1e-8);
        assert!((x - (1.0 + 2.0 * (TAU * 1.3 / 8.0 + 30f64.to_radians()).sin())).abs() < 1e-15);
        assert_eq!(Oscillation::constant(4.0).eval(10.0), (4.0, 0.0, 0.0));
    }

    #[test]
    fn toml_round_trip_and_hash() {
        let cfg = SimConfig::default();
        let text = cfg.to_toml_string();
        let back = SimConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.hash(), back.hash());
        let mut other = cfg.clone();
        other.sensors.rng_seed = 2;
        assert_ne!(cfg.hash(), other.hash());
    }

    #[test]
    fn partial_file_uses_defaults() {
        let cfg = SimConfig::from_toml_str(
            "[scenario]\nduration = 60.0\n[sensors]\nlever_arm = [0.0, 0.0, 0.0]\n",
        )
        .unwrap();
        assert_eq!(cfg.scenario.duration, 60.0);
        assert_eq!(cfg.scenario.interval, 0.02);
        assert_eq!(cfg.sensors.gyro_drift, 0.01);
        assert_eq!(cfg.sensors.lever_arm, [0.0; 3]);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(SimConfig::from_toml_str("[scenario]\nimu_rate = 150.0\n").is_err());
        assert!(SimConfig::from_toml_str("[scenario]\nduration = -1.0\n").is_err());
        assert!(SimConfig::from_toml_str("[sensors]\ngyro_drift = -0.1\n").is_err());
        assert!(SimConfig::from_toml_str("[scenario]\nbogus = 1\n").is_err());
        assert!(SimConfig::from_toml_str("[scenario]\ngps_rate = 3.0\n").is_err());
        assert!(SimConfig::from_toml_str("[scenario]\ngps_rate = 2.0\n").is_ok());
    }

    #[test]
    fn unit_conversions() {
        let e = SensorErrors::default();
        assert!((e.gyro_drift_si() - 0.01 * std::f64::consts::PI / 180.0 / 3600.0).abs() < 1e-22);
        assert!((e.accel_bias_si() - 50e-6 * 9.80665).abs() < 1e-18);
        assert_eq!(ScenarioConfig::default().samples_per_update().unwrap(), 2);
        assert_eq!(ScenarioConfig::default().updates(), 15000);
    }
}

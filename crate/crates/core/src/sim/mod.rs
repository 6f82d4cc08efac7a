//! Flight simulator: sinusoidal attitude and velocity profiles, inverse IMU
//! synthesis and a lever-arm aware GPS model.

mod config;
mod sensors;
mod trajectory;

pub use config::{
    AttitudeProfile, BiasMode, InitialPosition, Oscillation, ScenarioConfig, SensorErrors,
    SimConfig, VelocityProfile,
};
pub use sensors::{draw_biases, gps_measure, ideal_imu, run_rng, sample_imu, ImuSample};
pub use trajectory::{gen_truth, Trajectory, TruthSample, POSITION_STEP};

use crate::aligner::AidFix;
use crate::error::Result;

/// Truth and ideal IMU output of one scenario, computed once and shared by
/// every Monte-Carlo run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub trajectory: Trajectory,
    /// Truth at every update endpoint.
    pub truth: Vec<TruthSample>,
    pub ideal_imu: Vec<ImuSample>,
}

impl Scenario {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        let trajectory = Trajectory::new(config)?;
        let truth = gen_truth(&trajectory)?;
        let ideal_imu = ideal_imu(&trajectory)?;
        Ok(Self {
            trajectory,
            truth,
            ideal_imu,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        self.trajectory.config()
    }

    /// Corrupted IMU stream of run `run`.
    pub fn imu(&self, errors: &SensorErrors, run: u64) -> Vec<ImuSample> {
        let dt = 1.0 / self.config().imu_rate;
        sample_imu(
            &self.ideal_imu,
            errors,
            dt,
            &mut run_rng(errors.rng_seed, run, false),
        )
    }

    /// Aiding fixes of run `run` at the configured fix rate.
    pub fn gps(&self, errors: &SensorErrors, run: u64) -> Result<Vec<AidFix>> {
        let mut rng = run_rng(errors.rng_seed, run, true);
        let step = self.config().updates_per_fix();
        self.truth
            .iter()
            .step_by(step)
            .map(|s| gps_measure(s, errors, &mut rng))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fix_rate_decimation() {
        let cfg = ScenarioConfig {
            duration: 2.0,
            gps_rate: Some(2.0),
            ..ScenarioConfig::default()
        };
        let sc = Scenario::new(&cfg).unwrap();
        let fixes = sc.gps(&SensorErrors::ideal(), 0).unwrap();
        assert_eq!(fixes.len(), 5);
        assert_eq!(fixes[1].t, 0.5);
        assert_eq!(fixes[4].t, 2.0);
        assert_eq!(sc.ideal_imu.len(), 200);
    }

    #[test]
    fn runs_are_pure_functions_of_seed_and_index() {
        let cfg = ScenarioConfig {
            duration: 1.0,
            ..ScenarioConfig::default()
        };
        let sc = Scenario::new(&cfg).unwrap();
        let e = SensorErrors::default();
        assert_eq!(sc.imu(&e, 4), sc.imu(&e, 4));
        assert_eq!(sc.gps(&e, 4).unwrap(), sc.gps(&e, 4).unwrap());
        assert_ne!(sc.imu(&e, 4), sc.imu(&e, 5));
    }
}

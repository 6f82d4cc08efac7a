use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::config::{BiasMode, SensorErrors};
use super::trajectory::{Trajectory, TruthSample};
use crate::aligner::AidFix;
use crate::earth::{curvature_matrix, GeodeticPosition, NavVelocity};
use crate::error::Result;

/// Longest quadrature panel (s).
const MAX_PANEL: f64 = 1e-3;

/// One IMU output: integrated angular rate and specific force over the sample
/// period ending at `t_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuSample {
    pub t_end: f64,
    pub dtheta: Vector3<f64>,
    pub dv: Vector3<f64>,
}

/// Three-point Gauss-Legendre rule on `[a, b]`, composite over panels of at
/// most 1 ms.
fn integrate(
    a: f64,
    b: f64,
    f: &mut impl FnMut(f64) -> Result<(Vector3<f64>, Vector3<f64>)>,
) -> Result<(Vector3<f64>, Vector3<f64>)> {
    let x = (0.6f64).sqrt() / 2.0;
    let nodes = [
        (0.5 - x, 5.0 / 18.0),
        (0.5, 8.0 / 18.0),
        (0.5 + x, 5.0 / 18.0),
    ];
    let panels = ((b - a) / MAX_PANEL).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut acc = (Vector3::zeros(), Vector3::zeros());
    for i in 0..panels {
        let start = a + i as f64 * h;
        for (u, w) in nodes {
            let (g, s) = f(start + u * h)?;
            acc.0 += g * (w * h);
            acc.1 += s * (w * h);
        }
    }
    Ok(acc)
}

/// Error-free increments at `imu_rate` covering `[0, duration]`.
pub fn ideal_imu(trajectory: &Trajectory) -> Result<Vec<ImuSample>> {
    let cfg = trajectory.config();
    let dt = 1.0 / cfg.imu_rate;
    let n = cfg.updates() * cfg.samples_per_update()?;
    let mut eval = |t: f64| trajectory.state_at(t).map(|s| (s.omega_ib_b, s.f_b));
    (0..n)
        .map(|i| {
            let (a, b) = (i as f64 * dt, (i + 1) as f64 * dt);
            let (dtheta, dv) = integrate(a, b, &mut eval)?;
            Ok(ImuSample {
                t_end: b,
                dtheta,
                dv,
            })
        })
        .collect()
}

/// Random-stream layout: every run owns two ChaCha streams under the
/// configured seed, one for the IMU and one for the aiding sensor.
pub fn run_rng(seed: u64, run: u64, aiding: bool) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(2 * run + u64::from(aiding));
    rng
}

fn normal3(rng: &mut impl Rng) -> Vector3<f64> {
    Vector3::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    )
}

/// Constant gyro drift (rad/s) and accelerometer bias (m/s^2) for one run.
pub fn draw_biases(errors: &SensorErrors, rng: &mut impl Rng) -> (Vector3<f64>, Vector3<f64>) {
    let (g, a) = (errors.gyro_drift_si(), errors.accel_bias_si());
    match errors.bias_mode {
        BiasMode::Fixed => (Vector3::repeat(g), Vector3::repeat(a)),
        BiasMode::Random => {
            let gyro = normal3(rng) * g;
            (gyro, normal3(rng) * a)
        }
    }
}

/// Adds biases and white noise to ideal increments. `dt` is the IMU sample
/// period.
pub fn sample_imu(
    ideal: &[ImuSample],
    errors: &SensorErrors,
    dt: f64,
    rng: &mut impl Rng,
) -> Vec<ImuSample> {
    let (drift, bias) = draw_biases(errors, rng);
    let gyro_sigma = errors.gyro_noise_si() * dt.sqrt();
    let accel_sigma = errors.accel_noise_si() * dt.sqrt();
    ideal
        .iter()
        .map(|s| {
            let dtheta = s.dtheta + drift * dt + normal3(rng) * gyro_sigma;
            let dv = s.dv + bias * dt + normal3(rng) * accel_sigma;
            ImuSample {
                t_end: s.t_end,
                dtheta,
                dv,
            }
        })
        .collect()
}

/// Aiding fix at the antenna: lever-arm displaced and noise corrupted.
pub fn gps_measure(
    truth: &TruthSample,
    errors: &SensorErrors,
    rng: &mut impl Rng,
) -> Result<AidFix> {
    let rc = curvature_matrix(&truth.p)?;
    let arm = errors.lever_arm();
    let arm_n = truth.c_b_n * arm;
    let dv_arm = truth.c_b_n * truth.omega_eb_b()?.cross(&arm);
    let v_noise = normal3(rng) * errors.gps_vel_sigma;
    let p_noise = normal3(rng) * errors.gps_pos_sigma;
    let p = truth.p.as_vector() + rc * (arm_n + p_noise);
    Ok(AidFix {
        t: truth.t,
        v: NavVelocity(truth.v.0 + dv_arm + v_noise),
        p: GeodeticPosition {
            lon: p[0],
            lat: p[1],
            height: p[2],
        },
    })
}

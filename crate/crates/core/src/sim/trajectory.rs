use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use crate::attitude::{euler_rates_to_body_rate, euler_to_dcm, Dcm, EulerAngles};
use crate::earth::{
    curvature_matrix, earth_rate_n, gravity_n, nav_rate_n, transport_rate_n, GeodeticPosition,
    NavVelocity,
};
use crate::error::{Error, Result};

/// Position integration step (s).
pub const POSITION_STEP: f64 = 1e-3;
const MAX_LATITUDE: f64 = 89.9 * std::f64::consts::PI / 180.0;

/// Kinematic state of the vehicle together with the ideal sensor outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthSample {
    pub t: f64,
    pub c_b_n: Dcm,
    pub v: NavVelocity,
    pub p: GeodeticPosition,
    /// rad/s
    pub omega_ib_b: Vector3<f64>,
    /// m/s^2
    pub f_b: Vector3<f64>,
}

impl TruthSample {
    /// Body rate relative to the earth, resolved in the body frame.
    pub fn omega_eb_b(&self) -> Result<Vector3<f64>> {
        let omega_in = nav_rate_n(&self.v, &self.p)?;
        Ok(self.omega_ib_b - self.c_b_n.transpose() * omega_in)
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    p: Vector3<f64>,
    dp: Vector3<f64>,
}

/// Analytic attitude and velocity profiles with numerically integrated
/// position, queried at arbitrary times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    config: ScenarioConfig,
    nodes: Vec<Node>,
}

impl Trajectory {
    /// Integrates position over `[0, duration]` plus one update interval of margin.
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let p0 = config.position.to_position()?;
        let end = config.duration + config.interval;
        let steps = (end / POSITION_STEP).ceil() as usize;
        let mut nodes = Vec::with_capacity(steps + 1);
        let mut p = p0.as_vector();
        let rate = |t: f64, p: &Vector3<f64>| -> Result<Vector3<f64>> {
            let pos = GeodeticPosition {
                lon: p[0],
                lat: p[1],
                height: p[2],
            };
            if pos.lat.abs() > MAX_LATITUDE {
                return Err(Error::PolarSingularity { latitude: pos.lat });
            }
            Ok(curvature_matrix(&pos)? * velocity_profile(config, t).0 .0)
        };
        for i in 0..=steps {
            let t = i as f64 * POSITION_STEP;
            let dp = rate(t, &p)?;
            nodes.push(Node { p, dp });
            if i == steps {
                break;
            }
            let h = POSITION_STEP;
            let k1 = dp;
            let k2 = rate(t + h / 2.0, &(p + k1 * (h / 2.0)))?;
            let k3 = rate(t + h / 2.0, &(p + k2 * (h / 2.0)))?;
            let k4 = rate(t + h, &(p + k3 * h))?;
            p += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
        }
        Ok(Self {
            config: config.clone(),
            nodes,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    /// Last time covered by the integrated position.
    pub fn end_time(&self) -> f64 {
        (self.nodes.len() - 1) as f64 * POSITION_STEP
    }

    /// Cubic Hermite interpolation between position nodes.
    pub fn position(&self, t: f64) -> GeodeticPosition {
        let x = (t / POSITION_STEP).clamp(0.0, (self.nodes.len() - 1) as f64);
        let i = (x.floor() as usize).min(self.nodes.len() - 2);
        let s = x - i as f64;
        let (a, b) = (&self.nodes[i], &self.nodes[i + 1]);
        let h = POSITION_STEP;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let p = a.p * h00 + a.dp * (h10 * h) + b.p * h01 + b.dp * (h11 * h);
        GeodeticPosition {
            lon: p[0],
            lat: p[1],
            height: p[2],
        }
    }

    pub fn euler(&self, t: f64) -> (EulerAngles, EulerAngles) {
        let a = &self.config.attitude;
        let (r, dr, _) = a.roll.eval(t);
        let (p, dp, _) = a.pitch.eval(t);
        let (y, dy, _) = a.yaw.eval(t);
        let rad = f64::to_radians;
        (
            EulerAngles::new(rad(r), rad(p), rad(y)),
            EulerAngles::new(rad(dr), rad(dp), rad(dy)),
        )
    }

    pub fn velocity(&self, t: f64) -> (NavVelocity, Vector3<f64>) {
        velocity_profile(&self.config, t)
    }

    /// Full truth state at `t`, including the ideal gyro and accelerometer
    /// outputs obtained by inverting the navigation equations.
    pub fn state_at(&self, t: f64) -> Result<TruthSample> {
        let (e, de) = self.euler(t);
        let (v, dv) = self.velocity(t);
        let p = self.position(t);
        let c_b_n = euler_to_dcm(&e);
        let c_n_b = c_b_n.transpose();
        let earth = earth_rate_n(p.lat);
        let transport = transport_rate_n(&v, &p)?;
        let omega_nb_b = euler_rates_to_body_rate(&e, &de);
        let omega_ib_b = omega_nb_b + c_n_b * (earth + transport);
        let f_n = dv + (earth * 2.0 + transport).cross(&v.0) - gravity_n(&p);
        Ok(TruthSample {
            t,
            c_b_n,
            v,
            p,
            omega_ib_b,
            f_b: c_n_b * f_n,
        })
    }
}

fn velocity_profile(config: &ScenarioConfig, t: f64) -> (NavVelocity, Vector3<f64>) {
    let v = &config.velocity;
    let (n, dn, _) = v.north.eval(t);
    let (u, du, _) = v.up.eval(t);
    let (e, de, _) = v.east.eval(t);
    (NavVelocity::new(n, u, e), Vector3::new(dn, du, de))
}

/// Truth samples at every update endpoint `k T`, `k = 0..=M`.
pub fn gen_truth(trajectory: &Trajectory) -> Result<Vec<TruthSample>> {
    let cfg = trajectory.config();
    (0..=cfg.updates())
        .map(|k| trajectory.state_at(k as f64 * cfg.interval))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::earth::radii_of_curvature;
    use crate::sim::config::{Oscillation, VelocityProfile};

    #[test]
    fn static_identities() {
        let cfg = ScenarioConfig::stationary(3.0, -2.0, 45.0, 10.0);
        let traj = Trajectory::new(&cfg).unwrap();
        for t in [0.0, 3.3, 10.0] {
            let s = traj.state_at(t).unwrap();
            let c_n_b = s.c_b_n.transpose();
            assert!((s.omega_ib_b - c_n_b * earth_rate_n(s.p.lat)).norm() < 1e-18);
            assert!((s.f_b + c_n_b * gravity_n(&s.p)).norm() < 1e-14);
            assert_eq!(s.p, cfg.position.to_position().unwrap());
        }
    }

    #[test]
    fn latitude_advances_with_northward_speed() {
        let cfg = ScenarioConfig {
            velocity: VelocityProfile {
                north: Oscillation::constant(100.0),
                up: Oscillation::default(),
                east: Oscillation::default(),
            },
            ..ScenarioConfig::stationary(0.0, 0.0, 0.0, 300.0)
        };
        let traj = Trajectory::new(&cfg).unwrap();
        let p = traj.position(300.0);
        let lat0 = 30f64.to_radians();
        let approx = 100.0 * 300.0 / radii_of_curvature(lat0).0;
        // meridian radius changes by ~0.01 % over the 0.27 deg travelled
        assert!(((p.lat - lat0) - approx).abs() < 1e-3 * approx);
        assert_eq!(p.lon, 0.0);
    }

    #[test]
    fn hermite_matches_nodes_and_is_smooth() {
        let traj = Trajectory::new(&ScenarioConfig {
            duration: 5.0,
            ..ScenarioConfig::default()
        })
        .unwrap();
        let node = traj.nodes[1234].p;
        assert_eq!(traj.position(1234.0 * POSITION_STEP).as_vector(), node);
        // midpoint against the node derivative estimate
        let t = 2.0005;
        let (a, b) = (
            traj.position(t - 1e-4).as_vector(),
            traj.position(t + 1e-4).as_vector(),
        );
        let v = traj.velocity(t).0;
        let dp = curvature_matrix(&traj.position(t)).unwrap() * v.0;
        assert!(((b - a) / 2e-4 - dp).norm() < 1e-6 * dp.norm());
    }

    #[test]
    fn polar_trajectory_rejected() {
        let cfg = ScenarioConfig {
            position: crate::sim::config::InitialPosition {
                lat_deg: 89.89,
                lon_deg: 0.0,
                height: 0.0,
            },
            velocity: VelocityProfile {
                north: Oscillation::constant(200.0),
                up: Oscillation::default(),
                east: Oscillation::default(),
            },
            ..ScenarioConfig::stationary(0.0, 0.0, 0.0, 60.0)
        };
        assert!(matches!(
            Trajectory::new(&cfg),
            Err(Error::PolarSingularity { .. })
        ));
    }

    #[test]
    fn endpoint_truth_count() {
        let cfg = ScenarioConfig {
            duration: 1.0,
            ..ScenarioConfig::default()
        };
        let truth = gen_truth(&Trajectory::new(&cfg).unwrap()).unwrap();
        assert_eq!(truth.len(), 51);
        assert_eq!(truth[50].t, 1.0);
    }
}

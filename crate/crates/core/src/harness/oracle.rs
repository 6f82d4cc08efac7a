//! Brute-force fine-step references for the aligner integrals, the interval
//! kernels and the navigation equations.

use nalgebra::{Matrix3, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::attitude::{quat_mul_matrices, skew, Dcm};
use crate::earth::{
    curvature_matrix, earth_rate_n, gravity_n, nav_rate_n, transport_rate_n, GeodeticPosition,
    NavVelocity,
};
use crate::error::{Error, Result};
use crate::increments::ImuInterval;
use crate::sim::Trajectory;

/// Reference aligner quantities at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleState {
    pub t: f64,
    /// `C_{b(t)}^{b(0)}`
    pub body: Matrix3<f64>,
    /// `C_{n(t)}^{n(0)}`
    pub nav: Matrix3<f64>,
    pub alpha_v: Vector3<f64>,
    pub beta_v: Vector3<f64>,
    pub alpha_p: Vector3<f64>,
    pub beta_p: Vector3<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Augmented {
    body: Matrix3<f64>,
    nav: Matrix3<f64>,
    alpha_v: Vector3<f64>,
    alpha_p: Vector3<f64>,
    /// `int C_n v`
    r: Vector3<f64>,
    /// `int C_n (omega_ie x v - g)`
    u: Vector3<f64>,
    /// `int u`
    uu: Vector3<f64>,
}

impl Augmented {
    fn axpy(&self, k: &Self, h: f64) -> Self {
        Self {
            body: self.body + k.body * h,
            nav: self.nav + k.nav * h,
            alpha_v: self.alpha_v + k.alpha_v * h,
            alpha_p: self.alpha_p + k.alpha_p * h,
            r: self.r + k.r * h,
            u: self.u + k.u * h,
            uu: self.uu + k.uu * h,
        }
    }

    fn rk4(&self, t: f64, h: f64, f: &impl Fn(f64, &Self) -> Result<Self>) -> Result<Self> {
        let k1 = f(t, self)?;
        let k2 = f(t + h / 2.0, &self.axpy(&k1, h / 2.0))?;
        let k3 = f(t + h / 2.0, &self.axpy(&k2, h / 2.0))?;
        let k4 = f(t + h, &self.axpy(&k3, h))?;
        let sum = k1.axpy(&k2, 2.0).axpy(&k3, 2.0).axpy(&k4, 1.0);
        Ok(self.axpy(&sum, h / 6.0))
    }
}

/// Integrates the defining ODEs of the aligner integrals along the analytic
/// trajectory with classical RK4, stopping exactly at each of the ascending
/// `times`. `substep` should not exceed `T / 100`.
pub fn oracle_integrate(
    trajectory: &Trajectory,
    times: &[f64],
    substep: f64,
) -> Result<Vec<OracleState>> {
    if substep.is_nan() || substep <= 0.0 {
        return Err(Error::InvalidInput("substep must be positive".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|t| *t < 0.0) {
        return Err(Error::InvalidInput(
            "oracle times must be ascending and non-negative".into(),
        ));
    }
    let v0 = trajectory.velocity(0.0).0 .0;
    let rhs = |t: f64, x: &Augmented| -> Result<Augmented> {
        let s = trajectory.state_at(t)?;
        let omega_in = nav_rate_n(&s.v, &s.p)?;
        let omega_ie = earth_rate_n(s.p.lat);
        let v = s.v.0;
        Ok(Augmented {
            body: x.body * skew(&s.omega_ib_b),
            nav: x.nav * skew(&omega_in),
            alpha_v: x.body * s.f_b,
            alpha_p: x.alpha_v,
            r: x.nav * v,
            u: x.nav * (omega_ie.cross(&v) - gravity_n(&s.p)),
            uu: x.u,
        })
    };
    let z = Vector3::zeros();
    let mut x = Augmented {
        body: Matrix3::identity(),
        nav: Matrix3::identity(),
        alpha_v: z,
        alpha_p: z,
        r: z,
        u: z,
        uu: z,
    };
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t;
        let n = (span / substep).ceil() as usize;
        if n > 0 {
            let h = span / n as f64;
            for i in 0..n {
                x = x.rk4(t + i as f64 * h, h, &rhs)?;
            }
        }
        t = target;
        let v = trajectory.velocity(t).0 .0;
        out.push(OracleState {
            t,
            body: x.body,
            nav: x.nav,
            alpha_v: x.alpha_v,
            beta_v: x.nav * v - v0 + x.u,
            alpha_p: x.alpha_p,
            beta_p: x.r - v0 * t + x.uu,
        });
    }
    Ok(out)
}

/// Navigation state re-integrated from the emitted gyro and accelerometer
/// outputs, independently of the analytic attitude, velocity and position.
pub fn reintegrate_navigation(
    trajectory: &Trajectory,
    t_end: f64,
    substep: f64,
) -> Result<(Dcm, NavVelocity, GeodeticPosition)> {
    type State = (Matrix3<f64>, Vector3<f64>, Vector3<f64>);
    let rhs = |t: f64, x: &State| -> Result<State> {
        let s = trajectory.state_at(t)?;
        let p = GeodeticPosition::from_vector(&x.2)?;
        let v = NavVelocity(x.1);
        let earth = earth_rate_n(p.lat);
        let transport = transport_rate_n(&v, &p)?;
        let dc = x.0 * skew(&s.omega_ib_b) - skew(&(earth + transport)) * x.0;
        let dv = x.0 * s.f_b - (earth * 2.0 + transport).cross(&x.1) + gravity_n(&p);
        let dp = curvature_matrix(&p)? * x.1;
        Ok((dc, dv, dp))
    };
    let add =
        |x: &State, k: &State, h: f64| -> State { (x.0 + k.0 * h, x.1 + k.1 * h, x.2 + k.2 * h) };
    let s0 = trajectory.state_at(0.0)?;
    let mut x: State = (*s0.c_b_n.matrix(), s0.v.0, s0.p.as_vector());
    let n = (t_end / substep).ceil() as usize;
    let h = t_end / n as f64;
    for i in 0..n {
        let t = i as f64 * h;
        let k1 = rhs(t, &x)?;
        let k2 = rhs(t + h / 2.0, &add(&x, &k1, h / 2.0))?;
        let k3 = rhs(t + h / 2.0, &add(&x, &k2, h / 2.0))?;
        let k4 = rhs(t + h, &add(&x, &k3, h))?;
        let sum = add(&add(&add(&k1, &k2, 2.0), &k3, 2.0), &k4, 1.0);
        x = add(&x, &sum, h / 6.0);
    }
    // GeodeticPosition::new would wrap longitude; keep the raw integral
    let p = GeodeticPosition {
        lon: x.2[0],
        lat: x.2[1],
        height: x.2[2],
    };
    Ok((Dcm::from_matrix_unchecked(x.0), NavVelocity(x.1), p))
}

/// Fine-step references for one update interval of length `T` driven by
/// `omega(s)`, `force(s)`, `s` in `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalReference {
    /// Half-interval increments integrated on the fine grid.
    pub imu: ImuInterval,
    /// `int (I + theta x) f` with `theta(s) = int_0^s omega`.
    pub sculling_first_order: Vector3<f64>,
    /// `int_0^T (T - s) (I + theta x) f ds`.
    pub double_first_order: Vector3<f64>,
    /// `int (omega + theta x omega / 2)`.
    pub rotvec_first_order: Vector3<f64>,
    /// `int C_{b(s)}^{b(0)} f` with the attitude propagated exactly.
    pub sculling_exact: Vector3<f64>,
    pub double_exact: Vector3<f64>,
    /// Rotation vector of `C_{b(T)}^{b(0)}`.
    pub rotvec_exact: Vector3<f64>,
}

/// Trapezoidal quadrature over `substeps` (even) panels, with the attitude
/// propagated by RK4 on the quaternion kinematics.
pub fn interval_reference(
    omega: impl Fn(f64) -> Vector3<f64>,
    force: impl Fn(f64) -> Vector3<f64>,
    interval: f64,
    substeps: usize,
) -> IntervalReference {
    let n = substeps + substeps % 2;
    let h = interval / n as f64;
    let quat_rate = |q: &Vector4<f64>, w: &Vector3<f64>| {
        quat_mul_matrices(q).0 * Vector4::new(0.0, w.x, w.y, w.z) * 0.5
    };
    let rot = |q: &Vector4<f64>| -> Matrix3<f64> {
        let (s, e) = (q[0], Vector3::new(q[1], q[2], q[3]));
        Matrix3::identity() * (s * s - e.dot(&e)) + e * e.transpose() * 2.0 + skew(&e) * (2.0 * s)
    };

    let mut theta = Vector3::zeros();
    let mut vel = Vector3::zeros();
    let mut q = Vector4::new(1.0, 0.0, 0.0, 0.0);
    let (mut half_theta, mut half_vel) = (theta, vel);
    let z = Vector3::zeros();
    let (mut sc_fo, mut db_fo, mut rv_fo, mut sc_ex, mut db_ex) = (z, z, z, z, z);
    let mut prev: Option<[Vector3<f64>; 5]> = None;
    for i in 0..=n {
        let s = i as f64 * h;
        let (w, f) = (omega(s), force(s));
        let g_fo = f + theta.cross(&f);
        let r_fo = w + theta.cross(&w) * 0.5;
        let g_ex = rot(&q) * f;
        let cur = [
            g_fo,
            g_fo * (interval - s),
            r_fo,
            g_ex,
            g_ex * (interval - s),
        ];
        if let Some(p) = prev {
            for (acc, k) in [&mut sc_fo, &mut db_fo, &mut rv_fo, &mut sc_ex, &mut db_ex]
                .into_iter()
                .zip(0..)
            {
                *acc += (p[k] + cur[k]) * (h / 2.0);
            }
        }
        prev = Some(cur);
        if i == n / 2 {
            half_theta = theta;
            half_vel = vel;
        }
        if i == n {
            break;
        }
        let (w1, wm, w2) = (w, omega(s + h / 2.0), omega(s + h));
        theta += (w1 + wm * 4.0 + w2) * (h / 6.0);
        vel += (f + force(s + h / 2.0) * 4.0 + force(s + h)) * (h / 6.0);
        let k1 = quat_rate(&q, &w1);
        let k2 = quat_rate(&(q + k1 * (h / 2.0)), &wm);
        let k3 = quat_rate(&(q + k2 * (h / 2.0)), &wm);
        let k4 = quat_rate(&(q + k3 * h), &w2);
        q += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
        q /= q.norm();
    }
    let e = Vector3::new(q[1], q[2], q[3]);
    let angle = 2.0 * e.norm().atan2(q[0]);
    let rotvec_exact = if e.norm() > 0.0 {
        e * (angle / e.norm())
    } else {
        z
    };
    IntervalReference {
        imu: ImuInterval::new(half_theta, theta - half_theta, half_vel, vel - half_vel),
        sculling_first_order: sc_fo,
        double_first_order: db_fo,
        rotvec_first_order: rv_fo,
        sculling_exact: sc_ex,
        double_exact: db_ex,
        rotvec_exact,
    }
}

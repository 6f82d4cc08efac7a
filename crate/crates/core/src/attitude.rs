//! Rotation algebra: quaternions, direction cosine matrices, rotation vectors
//! and Euler angles.
//!
//! Quaternions are stored scalar-first and kept in the canonical hemisphere
//! `s >= 0`. [`quat_to_dcm`] follows the navigation-to-body convention: for a
//! quaternion `q` encoding the initial attitude it returns `C_n^b`.

use std::ops::Mul;

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::earth::wrap_pi;
use crate::error::{Error, Result};

/// Rotation vectors shorter than this use the series form of Rodrigues' formula.
const SMALL_ANGLE: f64 = 1e-7;
/// Orthonormality drift above which composed matrices are repaired.
const REPAIR_THRESHOLD: f64 = 1e-9;
/// Tolerated deviation before a matrix is refused as a rotation.
const ROTATION_TOLERANCE: f64 = 1e-6;
/// Pitch closer than this to +-90 deg is reported as gimbal proximity.
const GIMBAL_MARGIN: f64 = 1e-6;

/// Skew-symmetric cross-product matrix: `skew(a) * b == a.cross(&b)`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0)
}

/// Unit attitude quaternion `[s, eta]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitQuaternion {
    pub s: f64,
    pub eta: Vector3<f64>,
}

impl UnitQuaternion {
    pub const IDENTITY: Self = Self {
        s: 1.0,
        eta: Vector3::new(0.0, 0.0, 0.0),
    };

    /// Normalizes `v` (scalar first) and moves it into the canonical hemisphere.
    pub fn from_vector(v: &Vector4<f64>) -> Result<Self> {
        let n = v.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidInput(
                "quaternion has zero or non-finite norm".into(),
            ));
        }
        let v = v / n;
        Ok(Self {
            s: v[0],
            eta: Vector3::new(v[1], v[2], v[3]),
        }
        .canonical())
    }

    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::new(self.s, self.eta[0], self.eta[1], self.eta[2])
    }

    /// Sign choice `s >= 0`; on the `s == 0` great circle the first nonzero
    /// vector component is made positive.
    pub fn canonical(self) -> Self {
        let flip = if self.s != 0.0 {
            self.s < 0.0
        } else {
            self.eta
                .iter()
                .find(|c| **c != 0.0)
                .is_some_and(|c| *c < 0.0)
        };
        if flip {
            Self {
                s: -self.s,
                eta: -self.eta,
            }
        } else {
            self
        }
    }

    /// Rotation angle separating two attitudes, independent of sign.
    pub fn angle_to(&self, other: &Self) -> f64 {
        // relative quaternion conj(other) (x) self
        let ds = other.s * self.s + other.eta.dot(&self.eta);
        let dv = self.eta * other.s - other.eta * self.s - other.eta.cross(&self.eta);
        2.0 * dv.norm().atan2(ds.abs())
    }
}

/// Direction cosine matrix (proper orthonormal 3x3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dcm(Matrix3<f64>);

impl Dcm {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Checks orthonormality and determinant to `1e-6`.
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let dev = rotation_deviation(&m);
        if dev.is_finite() && dev <= ROTATION_TOLERANCE {
            Ok(Self(m))
        } else {
            Err(Error::NotARotation { deviation: dev })
        }
    }

    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// `max(||C^T C - I||_F, |det C - 1|)`.
    pub fn deviation(&self) -> f64 {
        rotation_deviation(&self.0)
    }

    /// Nearest orthonormal matrix (symmetric orthogonalization).
    pub fn orthonormalized(&self) -> Self {
        let svd = self.0.svd(true, true);
        let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
        Self(u * vt)
    }

    /// Repairs the matrix only when drift exceeds `1e-9`.
    pub fn repaired(self) -> Self {
        if self.deviation() > REPAIR_THRESHOLD {
            self.orthonormalized()
        } else {
            self
        }
    }

    /// Rotation angle of `self * other^T`.
    pub fn angle_to(&self, other: &Dcm) -> f64 {
        let r = self.0 * other.0.transpose();
        let v = Vector3::new(
            r[(2, 1)] - r[(1, 2)],
            r[(0, 2)] - r[(2, 0)],
            r[(1, 0)] - r[(0, 1)],
        );
        let cos = (r.trace() - 1.0) / 2.0;
        (v.norm() / 2.0).atan2(cos)
    }
}

impl Mul for Dcm {
    type Output = Dcm;
    fn mul(self, rhs: Dcm) -> Dcm {
        Dcm(self.0 * rhs.0)
    }
}

impl Mul<Vector3<f64>> for &Dcm {
    type Output = Vector3<f64>;
    fn mul(self, rhs: Vector3<f64>) -> Vector3<f64> {
        self.0 * rhs
    }
}

impl Mul<Vector3<f64>> for Dcm {
    type Output = Vector3<f64>;
    fn mul(self, rhs: Vector3<f64>) -> Vector3<f64> {
        self.0 * rhs
    }
}

fn rotation_deviation(m: &Matrix3<f64>) -> f64 {
    let ortho = (m.transpose() * m - Matrix3::identity()).norm();
    let det = (m.determinant() - 1.0).abs();
    ortho.max(det)
}

/// Rodrigues' formula `exp(phi x)`.
pub fn rotvec_to_dcm(phi: &Vector3<f64>) -> Dcm {
    let angle = phi.norm();
    let k = skew(phi);
    let k2 = k * k;
    let (a, b) = if angle < SMALL_ANGLE {
        let a2 = angle * angle;
        (1.0 - a2 / 6.0, 0.5 - a2 / 24.0)
    } else {
        (angle.sin() / angle, (1.0 - angle.cos()) / (angle * angle))
    };
    Dcm(Matrix3::identity() + k * a + k2 * b)
}

/// `C_n^b = (s^2 - eta.eta) I + 2 eta eta^T - 2 s (eta x)`.
pub fn quat_to_dcm(q: &UnitQuaternion) -> Dcm {
    let (s, e) = (q.s, q.eta);
    Dcm(Matrix3::identity() * (s * s - e.dot(&e)) + e * e.transpose() * 2.0 - skew(&e) * (2.0 * s))
}

/// Inverse of [`quat_to_dcm`] using Shepperd's branch selection.
pub fn dcm_to_quat(c: &Dcm) -> Result<UnitQuaternion> {
    let dev = c.deviation();
    if !(dev.is_finite() && dev <= ROTATION_TOLERANCE) {
        return Err(Error::NotARotation { deviation: dev });
    }
    // quat_to_dcm yields the transpose of the usual Hamilton rotation matrix
    let r = c.0.transpose();
    let tr = r.trace();
    let cands = [
        1.0 + tr,
        1.0 + 2.0 * r[(0, 0)] - tr,
        1.0 + 2.0 * r[(1, 1)] - tr,
        1.0 + 2.0 * r[(2, 2)] - tr,
    ];
    let (branch, _) =
        cands.iter().enumerate().fold(
            (0, f64::MIN),
            |best, (i, &v)| if v > best.1 { (i, v) } else { best },
        );
    let v = match branch {
        0 => {
            let s = 0.5 * cands[0].sqrt();
            let f = 0.25 / s;
            Vector4::new(
                s,
                (r[(2, 1)] - r[(1, 2)]) * f,
                (r[(0, 2)] - r[(2, 0)]) * f,
                (r[(1, 0)] - r[(0, 1)]) * f,
            )
        }
        1 => {
            let x = 0.5 * cands[1].sqrt();
            let f = 0.25 / x;
            Vector4::new(
                (r[(2, 1)] - r[(1, 2)]) * f,
                x,
                (r[(0, 1)] + r[(1, 0)]) * f,
                (r[(0, 2)] + r[(2, 0)]) * f,
            )
        }
        2 => {
            let y = 0.5 * cands[2].sqrt();
            let f = 0.25 / y;
            Vector4::new(
                (r[(0, 2)] - r[(2, 0)]) * f,
                (r[(0, 1)] + r[(1, 0)]) * f,
                y,
                (r[(1, 2)] + r[(2, 1)]) * f,
            )
        }
        _ => {
            let z = 0.5 * cands[3].sqrt();
            let f = 0.25 / z;
            Vector4::new(
                (r[(1, 0)] - r[(0, 1)]) * f,
                (r[(0, 2)] + r[(2, 0)]) * f,
                (r[(1, 2)] + r[(2, 1)]) * f,
                z,
            )
        }
    };
    UnitQuaternion::from_vector(&v)
}

/// Left (`Q+`) and right (`Q-`) quaternion multiplication matrices:
/// `p (x) q = Q+(p) q = Q-(q) p`. The argument need not be unit length.
pub fn quat_mul_matrices(q: &Vector4<f64>) -> (Matrix4<f64>, Matrix4<f64>) {
    let s = q[0];
    let eta = Vector3::new(q[1], q[2], q[3]);
    let ex = skew(&eta);
    let mut plus = Matrix4::zeros();
    let mut minus = Matrix4::zeros();
    for m in [&mut plus, &mut minus] {
        m[(0, 0)] = s;
        for i in 0..3 {
            m[(0, i + 1)] = -eta[i];
            m[(i + 1, 0)] = eta[i];
            m[(i + 1, i + 1)] = s;
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            plus[(i + 1, j + 1)] += ex[(i, j)];
            minus[(i + 1, j + 1)] -= ex[(i, j)];
        }
    }
    (plus, minus)
}

/// Embeds a 3-vector as a pure quaternion `(0, v)`.
pub fn pure(v: &Vector3<f64>) -> Vector4<f64> {
    Vector4::new(0.0, v[0], v[1], v[2])
}

/// Attitude chain rule `C_b^n(t) = C_{n(0)}^{n(t)} C_b^n(0) C_{b(t)}^{b(0)}`,
/// repaired to the nearest rotation when the product drifts.
pub fn compose_attitude(nav_change: &Dcm, initial: &Dcm, body_change: &Dcm) -> Dcm {
    (*nav_change * *initial * *body_change).repaired()
}

/// Roll, pitch and yaw (rad).
///
/// Body-to-navigation rotation is heading about Up, then pitch about the
/// rotated East axis, then roll about the twice-rotated North axis. Heading is
/// positive from North towards East, pitch positive nose-up, roll positive
/// right-wing-down (body axes forward-up-right).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerAngles {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl EulerAngles {
    pub fn new(roll: f64, pitch: f64, yaw: f64) -> Self {
        Self { roll, pitch, yaw }
    }

    pub fn to_degrees(self) -> [f64; 3] {
        [
            self.roll.to_degrees(),
            self.pitch.to_degrees(),
            self.yaw.to_degrees(),
        ]
    }
}

fn rot_north(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

fn rot_up(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

fn rot_east(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Body-to-navigation DCM `C_b^n` from Euler angles.
pub fn euler_to_dcm(e: &EulerAngles) -> Dcm {
    Dcm(rot_up(-e.yaw) * rot_east(e.pitch) * rot_north(e.roll))
}

/// Euler extraction from `C_b^n`. The flag is set when pitch is within
/// `1e-6` rad of +-90 deg, where roll and yaw are not separable.
pub fn dcm_to_euler(c: &Dcm) -> (EulerAngles, bool) {
    let m = &c.0;
    let pitch = m[(1, 0)].clamp(-1.0, 1.0).asin();
    let gimbal = pitch.abs() > std::f64::consts::FRAC_PI_2 - GIMBAL_MARGIN;
    let yaw = m[(2, 0)].atan2(m[(0, 0)]);
    let roll = (-m[(1, 2)]).atan2(m[(1, 1)]);
    (
        EulerAngles {
            roll: wrap_pi(roll),
            pitch,
            yaw: wrap_pi(yaw),
        },
        gimbal,
    )
}

/// Angular rate of the body relative to the navigation frame, resolved in the
/// body frame, for Euler angles `e` changing at `rates`.
pub fn euler_rates_to_body_rate(e: &EulerAngles, rates: &EulerAngles) -> Vector3<f64> {
    // C = A(yaw) B(pitch) D(roll); omega = D^T B^T a + D^T b + d
    let d = rot_north(e.roll).transpose();
    let b = rot_east(e.pitch).transpose();
    let yaw_axis = Vector3::new(0.0, -rates.yaw, 0.0);
    let pitch_axis = Vector3::new(0.0, 0.0, rates.pitch);
    let roll_axis = Vector3::new(rates.roll, 0.0, 0.0);
    d * (b * yaw_axis) + d * pitch_axis + roll_axis
}

/// Attitude error `estimate (-) truth`, expressed as Euler angles of the
/// navigation-frame error rotation `C_est * C_true^T`.
pub fn attitude_error(estimate: &Dcm, truth: &Dcm) -> EulerAngles {
    dcm_to_euler(&(*estimate * truth.transpose())).0
}

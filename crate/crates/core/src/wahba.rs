//! Quaternion solution of `C alpha = beta` over many observation pairs: the
//! attitude is the eigenvector of the accumulated 4x4 `K` matrix belonging to
//! its smallest eigenvalue.

use nalgebra::{Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::attitude::{pure, quat_mul_matrices, UnitQuaternion};
use crate::error::{Error, Result};

/// Relative eigenvalue gap (to `trace K`) below which the attitude is treated
/// as unobservable.
pub const DEGENERACY_RATIO: f64 = 1e-9;
const JACOBI_TOLERANCE: f64 = 1e-14;
const MAX_SWEEPS: usize = 64;

/// Symmetric positive semidefinite 4x4 accumulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kmatrix(Matrix4<f64>);

impl Default for Kmatrix {
    fn default() -> Self {
        Self(Matrix4::zeros())
    }
}

impl Kmatrix {
    pub fn zeros() -> Self {
        Self::default()
    }

    /// Wraps a symmetric matrix. The upper triangle is mirrored down.
    pub fn from_symmetric(m: Matrix4<f64>) -> Self {
        let mut k = m;
        for i in 0..4 {
            for j in 0..i {
                k[(i, j)] = m[(j, i)];
            }
        }
        Self(k)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Adds `B^T B` with `B = [beta+] - [alpha-]`.
    pub fn accumulate(&mut self, alpha: &Vector3<f64>, beta: &Vector3<f64>) {
        let b = residual_operator(alpha, beta);
        let inc = b.transpose() * b;
        for i in 0..4 {
            for j in i..4 {
                let v = 0.5 * (inc[(i, j)] + inc[(j, i)]);
                self.0[(i, j)] += v;
                if i != j {
                    self.0[(j, i)] += v;
                }
            }
        }
    }

    /// Ascending eigenvalues and matching unit eigenvectors (columns).
    pub fn eigen(&self) -> ([f64; 4], Matrix4<f64>) {
        jacobi_eigen(&self.0)
    }

    /// Optimal quaternion and the smallest eigenvalue.
    pub fn optimal_quaternion(&self) -> Result<(UnitQuaternion, f64)> {
        optimal_quaternion(self)
    }
}

/// `[beta+] - [alpha-]` for pure quaternions; maps the attitude quaternion to
/// the residual of `C_b^n alpha = beta`.
pub fn residual_operator(alpha: &Vector3<f64>, beta: &Vector3<f64>) -> Matrix4<f64> {
    let (beta_plus, _) = quat_mul_matrices(&pure(beta));
    let (_, alpha_minus) = quat_mul_matrices(&pure(alpha));
    beta_plus - alpha_minus
}

/// Cyclic Jacobi eigen-decomposition of a symmetric 4x4 matrix.
fn jacobi_eigen(m: &Matrix4<f64>) -> ([f64; 4], Matrix4<f64>) {
    let mut a = *m;
    let mut v = Matrix4::<f64>::identity();
    let scale = a.norm();
    if scale == 0.0 {
        return ([0.0; 4], v);
    }
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..4)
            .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOLERANCE * scale {
            break;
        }
        for p in 0..3 {
            for q in (p + 1)..4 {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..4 {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..4 {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..4 {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.map(|i| a[(i, i)]);
    let mut vectors = Matrix4::zeros();
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src).normalize());
    }
    (values, vectors)
}

fn lexicographic_gt(a: &Vector4<f64>, b: &Vector4<f64>) -> bool {
    for i in 0..4 {
        if a[i] != b[i] {
            return a[i] > b[i];
        }
    }
    false
}

/// Normalized eigenvector of `K` for its smallest eigenvalue, in the canonical
/// hemisphere.
///
/// Returns [`Error::DegenerateSpectrum`] when the two smallest eigenvalues are
/// closer than `1e-9 * trace K`; the error then carries the lexicographically
/// largest canonical eigenvector among the tied ones.
pub fn optimal_quaternion(k: &Kmatrix) -> Result<(UnitQuaternion, f64)> {
    let trace = k.trace();
    if !trace.is_finite() {
        return Err(Error::InvalidInput("non-finite K matrix".into()));
    }
    let (values, vectors) = k.eigen();
    let threshold = DEGENERACY_RATIO * trace;
    let gap = values[1] - values[0];
    let q = UnitQuaternion::from_vector(&vectors.column(0).into_owned())?;
    let lambda_min = q.as_vector().dot(&(k.matrix() * q.as_vector()));
    if gap <= threshold {
        let mut candidate = q;
        for i in 1..4 {
            if values[i] - values[0] > threshold {
                break;
            }
            let c = UnitQuaternion::from_vector(&vectors.column(i).into_owned())?;
            if lexicographic_gt(&c.as_vector(), &candidate.as_vector()) {
                candidate = c;
            }
        }
        return Err(Error::DegenerateSpectrum {
            candidate,
            lambda_min: values[0],
            gap,
            trace,
        });
    }
    Ok((q, lambda_min))
}

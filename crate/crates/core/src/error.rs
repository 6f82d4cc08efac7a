use thiserror::Error;

use crate::attitude::UnitQuaternion;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The curvilinear position parameterization is singular at the poles.
    #[error("position too close to a pole (latitude {latitude} rad)")]
    PolarSingularity { latitude: f64 },

    #[error("matrix is not a rotation (orthonormality/determinant off by {deviation:e})")]
    NotARotation { deviation: f64 },

    /// The two smallest eigenvalues of K are too close for the attitude to be
    /// observable. `candidate` is the deterministic tie-broken eigenvector.
    #[error("degenerate K spectrum (gap {gap:e}, trace {trace:e}): attitude not observable yet")]
    DegenerateSpectrum {
        candidate: UnitQuaternion,
        lambda_min: f64,
        gap: f64,
        trace: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("aiding gap of {gap} s at t = {at} s exceeds {max} s")]
    Gap { at: f64, gap: f64, max: f64 },

    #[error("IMU rate {imu_rate} Hz incompatible with update interval {interval} s")]
    RateMismatch { imu_rate: f64, interval: f64 },

    #[error("io: {0}")]
    Io(String),

    #[error("config: {0}")]
    Config(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

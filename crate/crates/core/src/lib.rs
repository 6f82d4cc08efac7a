//! In-flight coarse alignment for strapdown inertial navigation.
//!
//! The initial attitude of a moving vehicle is recovered from gyro and
//! accelerometer increments plus aided velocity/position. Two recursive
//! aligners are provided: [`aligner::VifAligner`] integrates the velocity
//! equation once, [`aligner::PifAligner`] integrates it twice. Both reduce the
//! problem to `C_b^n(0) alpha(t) = beta(t)` and solve it for a quaternion as a
//! smallest-eigenvalue problem ([`wahba`]).
//!
//! Navigation-frame vectors are North-Up-East throughout.

pub mod aligner;
pub mod attitude;
pub mod earth;
pub mod error;
pub mod harness;
pub mod increments;
pub mod sim;
pub mod wahba;

pub use error::{Error, Result};

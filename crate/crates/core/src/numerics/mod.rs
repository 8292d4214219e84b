//! Dual-mode scalars and 2x2 matrices acting as linear fractional maps.

mod matrix;
mod scalar;

pub use matrix::{MoebiusMatrix, WordProduct, POLE_TOL, RENORMALIZE_EVERY};
pub use scalar::{Mode, Scalar};

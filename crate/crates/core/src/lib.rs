//! De Rham's functional equation
//!
//! ```text
//! f(x) = Φ(A0; f(2x))      0 <= x <= 1/2
//! f(x) = Φ(A1; f(2x - 1))  1/2 <= x <= 1
//! ```
//!
//! driven by two linear fractional maps `Φ(A; z) = (az + b) / (cz + d)`.
//!
//! The crate evaluates the solution `f` and its inverse, computes the masses
//! its distribution measure `μ_f` gives to dyadic intervals, bounds the
//! dimension of `μ_f`, decides exactly whether `μ_f` is absolutely continuous
//! or singular, and checks the stationary-measure structure of `μ_g`.
//!
//! All arithmetic runs either on exact rationals or on `f64`, chosen by the
//! input matrices (see [`numerics::Scalar`]).

pub mod analysis;
pub mod error;
pub mod measure;
pub mod numerics;
pub mod presets;
pub mod solution;
pub mod stationary;
pub mod system;

pub use analysis::{
    classify, dimension_bounds, epsilon0, singular_dim_upper_bound, verify_normal_form,
    ClassificationReport, DimensionBounds, Verdict,
};
pub use error::{Condition, Error, Result, Violation};
pub use measure::{
    digit_probability, entropy_rate_estimate, interval_measure, ratio_state, sample_path,
    MeasureNode, SamplePath,
};
pub use numerics::{Mode, MoebiusMatrix, Scalar};
pub use solution::{
    closed_form_solution, eval, eval_dyadic, functional_equation_residual, inverse_eval,
    ClosedForm, DyadicAddress, ValueEnclosure,
};
pub use stationary::{
    mu_g_interval, shift_change_of_measure_check, stationarity_check, StationarityReport,
};
pub use system::{entropy, DeRhamSystem, FixedPoints};

//! M-estimation: a Newton solver for vector-valued estimating equations and
//! the empirical sandwich covariance estimator for the resulting roots.
//!
//! An [`EstimatingSystem`] supplies, for each subject, a score vector and
//! its analytic Jacobian. [`solve`] finds the parameter value where the
//! summed score vanishes, and [`sandwich_covariance`] returns the
//! `A^-1 B A^-T / n` covariance of that root, where `A` is minus the mean
//! Jacobian (the "bread") and `B` the mean outer product of scores (the
//! "meat"). Joint estimators stack independent parameter blocks with
//! [`StackedSystem`] so the cross-block covariance is captured.

mod error;
mod sandwich;
mod solve;
mod system;

pub use error::MEstimationError;
pub use sandwich::{contrast_variance, sandwich_covariance};
pub use solve::{solve, SolveOptions, SolveReport};
pub use system::{
    fd_jacobian, par_total_score, total_score, EstimatingSystem, StackedSystem,
};

use thiserror::Error;

use crate::solve::SolveReport;

#[derive(Debug, Error)]
pub enum MEstimationError {
    #[error(
        "estimating equation did not converge after {} iterations (score norm {:.3e})",
        .0.iterations,
        .0.final_score_norm
    )]
    NonConvergence(SolveReport),

    #[error("summed Jacobian is singular")]
    SingularJacobian,

    #[error("initial parameter value is outside the admissible region")]
    InadmissibleInit,

    #[error("bread matrix is singular; sandwich covariance undefined")]
    SingularBread,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

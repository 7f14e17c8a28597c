use thiserror::Error;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("degenerate arm: {0}")]
    DegenerateArm(String),

    #[error("degenerate negative-control outcome: {0}")]
    DegenerateNegativeControl(String),

    #[error(
        "augmentation-adjusted mean is nonpositive (treated {treated:.6}, control {control:.6})"
    )]
    NonpositiveAdjustedMean { treated: f64, control: f64 },

    #[error(
        "augmentation-adjusted mean is outside (0,1) (treated {treated:.6}, control {control:.6})"
    )]
    AdjustedMeanOutOfRange { treated: f64, control: f64 },

    #[error("every stratum is degenerate for this estimator")]
    AllStrataDegenerate,

    #[error("design matrix is rank deficient: {0}")]
    RankDeficientDesign(String),

    #[error("regression term refers to `{0}`, which is not usable: {1}")]
    BadRegressor(String, String),

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("bootstrap produced fewer than two usable replicates")]
    BootstrapDegenerate,

    #[error(transparent)]
    Core(#[from] nco_core::CoreError),

    #[error(transparent)]
    Solve(#[from] nco_mestimation::MEstimationError),
}

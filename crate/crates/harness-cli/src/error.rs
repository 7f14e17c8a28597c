use nco_core::Method;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid arguments: {0}")]
    InvalidArguments(String),

    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("method {0} failed in every replication")]
    AllRepsFailed(Method),

    #[error(transparent)]
    Estimation(#[from] nco_estimators::EstimatorError),

    #[error(transparent)]
    Simulator(#[from] nco_simulator::SimulatorError),

    #[error(transparent)]
    Core(#[from] nco_core::CoreError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// Process exit code contract: 2 for validation problems, 3 for
    /// estimation failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::AllRepsFailed(_) | HarnessError::Estimation(_) => 3,
            _ => 2,
        }
    }
}

use thiserror::Error;

/// Errors raised by dataset construction, ingestion, and stratification.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("required column `{0}` not found in input")]
    MissingColumn(String),

    #[error("row {row}, column `{column}`: {message}")]
    ParseError {
        row: usize,
        column: String,
        message: String,
    },

    #[error("row {row}: {reason}")]
    InvariantViolation { row: usize, reason: String },

    #[error("dataset must contain at least one record")]
    EmptyDataset,

    #[error("record `{id}` does not match the covariate schema: {reason}")]
    SchemaMismatch { id: String, reason: String },

    #[error("stratum key `{0}` is not a covariate in the dataset schema")]
    UnknownStratumKey(String),

    #[error("numeric stratum key `{0}` has no cut points")]
    UnbinnedNumericKey(String),

    #[error("cut points for `{0}` must be strictly ascending")]
    NonAscendingCuts(String),

    #[error("cut points given for `{0}`, which is not a numeric covariate")]
    CutsForNonNumericKey(String),

    #[error("covariate `{0}` has zero variance")]
    ZeroVariance(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

//! Domain types and data handling shared by the negative-control outcome
//! estimators, the simulator, and the study harness.
//!
//! The unit of analysis is a subject with a binary treatment indicator, a
//! binary primary outcome, a nonnegative count of negative-control events
//! (outcomes known to be unaffected by treatment), and an arbitrary set of
//! named covariates. Everything here is immutable after construction and
//! safe to share across threads.

mod csv_io;
mod error;
mod result;
mod stats;
mod stratify;
mod types;

pub use csv_io::{load_csv, write_csv, ColumnMap, Y2Source};
pub use error::CoreError;
pub use result::{Diagnostics, EstimateResult, Method};
pub use stats::{derive_seed, normal_quantile, pearson_correlation};
pub use stratify::{stratify, stratum_assignments, StratumCounts, StratumSpec};
pub use types::{CovariateKind, CovariateValue, Dataset, SubjectRecord};

//! Study harness tying the simulator and the estimators together, plus the
//! building blocks of the `nco` command-line tool: scenario studies with
//! replication-level output, one-shot cohort analysis, and plot-data export.

mod analyze;
mod error;
mod methods;
mod plotdata;
mod repcsv;
mod study;
mod summary;

pub use analyze::{
    analyze, build_strata, infer_schema, load_cohort, parse_regression, parse_terms,
    render_report, report_json,
};
pub use error::HarnessError;
pub use methods::{
    default_simulated_regression, default_simulated_strata, run_method, AnalysisOptions,
};
pub use plotdata::{emit_plot_data, write_plot_csv, PlotRow, REFERENCE_METHOD};
pub use repcsv::{read_rep_csv, write_rep_csv, REP_CSV_HEADER};
pub use study::{
    run_study, MethodSummary, RepRecord, StudyOptions, StudyOutput, StudySummary,
};
pub use summary::{summary_table, summary_toml};

//! Long-format estimate distributions for external plotting: every
//! per-replication estimate as one row, plus one reference row per
//! scenario carrying the true composite effect.

use std::path::Path;

use crate::error::HarnessError;
use crate::study::RepRecord;

/// Method tag used for the per-scenario reference rows.
pub const REFERENCE_METHOD: &str = "true_beta1";

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub scenario: String,
    pub n: usize,
    pub method: String,
    pub beta1_hat: f64,
}

/// Flattens replication records into plot rows. Errors when the input
/// carries no estimates.
pub fn emit_plot_data(records: &[RepRecord]) -> Result<Vec<PlotRow>, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::MalformedInput(
            "no estimate rows in the replication input".to_string(),
        ));
    }
    let mut rows: Vec<PlotRow> = records
        .iter()
        .map(|r| PlotRow {
            scenario: r.scenario.clone(),
            n: r.n,
            method: r.method.to_string(),
            beta1_hat: r.beta1_hat,
        })
        .collect();

    // One reference row per scenario.
    let mut seen: Vec<String> = Vec::new();
    for r in records {
        if !seen.contains(&r.scenario) {
            seen.push(r.scenario.clone());
            rows.push(PlotRow {
                scenario: r.scenario.clone(),
                n: r.n,
                method: REFERENCE_METHOD.to_string(),
                beta1_hat: r.true_beta1,
            });
        }
    }
    Ok(rows)
}

pub fn write_plot_csv(rows: &[PlotRow], path: &Path) -> Result<(), HarnessError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["scenario", "n", "method", "beta1_hat"])?;
    for row in rows {
        writer.write_record(&[
            row.scenario.clone(),
            row.n.to_string(),
            row.method.clone(),
            format!("{}", row.beta1_hat),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

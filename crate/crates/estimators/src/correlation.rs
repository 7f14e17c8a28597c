use nco_core::{pearson_correlation, Dataset};

use crate::error::EstimatorError;

/// Pearson correlation between the primary-outcome indicator and the
/// negative-control count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport {
    pub overall: f64,
    /// Correlation within the control arm only.
    pub control_arm: f64,
}

/// Correlation of `y1` and `y2`, overall and within the control arm.
/// Strength of this correlation is what determines how much precision the
/// augmented estimator can gain.
pub fn report_correlation(data: &Dataset) -> Result<CorrelationReport, EstimatorError> {
    let y1: Vec<f64> = data.records().iter().map(|r| f64::from(r.y1)).collect();
    let y2: Vec<f64> = data.records().iter().map(|r| f64::from(r.y2)).collect();
    let overall = pearson_correlation(&y1, &y2)
        .ok_or_else(|| EstimatorError::ZeroVariance("y1 or y2 overall".to_string()))?;

    let control: Vec<&nco_core::SubjectRecord> =
        data.records().iter().filter(|r| r.t == 0).collect();
    let c1: Vec<f64> = control.iter().map(|r| f64::from(r.y1)).collect();
    let c2: Vec<f64> = control.iter().map(|r| f64::from(r.y2)).collect();
    let control_arm = pearson_correlation(&c1, &c2)
        .ok_or_else(|| EstimatorError::ZeroVariance("y1 or y2 in the control arm".to_string()))?;

    Ok(CorrelationReport {
        overall,
        control_arm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nco_core::SubjectRecord;
    use std::collections::BTreeMap;

    fn subject(id: usize, t: u8, y1: u8, y2: u32) -> SubjectRecord {
        SubjectRecord {
            id: id.to_string(),
            t,
            y1,
            y2,
            covariates: BTreeMap::new(),
        }
    }

    #[test]
    fn perfectly_aligned_outcomes_give_one() {
        let rows: Vec<SubjectRecord> = (0..20)
            .map(|i| {
                let y = ((i / 2) % 2) as u8;
                subject(i, (i % 2) as u8, y, u32::from(y))
            })
            .collect();
        let data = Dataset::new(rows, BTreeMap::new()).unwrap();
        let report = report_correlation(&data).unwrap();
        assert_abs_diff_eq!(report.overall, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.control_arm, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_outcome_is_zero_variance() {
        let rows: Vec<SubjectRecord> = (0..10)
            .map(|i| subject(i, (i % 2) as u8, 0, (i % 3) as u32))
            .collect();
        let data = Dataset::new(rows, BTreeMap::new()).unwrap();
        assert!(matches!(
            report_correlation(&data),
            Err(EstimatorError::ZeroVariance(_))
        ));
    }
}

//! Per-arm conditional-mean models of the primary outcome given the
//! augmentation variables, following Zhang, Tsiatis & Davidian (2008):
//! saturated cell means when the negative-control count is effectively
//! binary, per-arm logistic regressions otherwise.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use nco_core::{Dataset, SubjectRecord};

use crate::error::EstimatorError;
use crate::regression::{fit_logistic, logistic_predict, Design, RegressionSpec};

/// Which auxiliary data augments the primary-outcome score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Augmentation {
    /// Negative-control count only.
    Y2,
    /// Baseline covariates only.
    W,
    /// Both.
    Y2W,
}

#[derive(Debug, Clone)]
enum MeanModelKind {
    /// Cell means per observed negative-control count; `fallback` covers
    /// counts unseen in this arm.
    Saturated {
        cells: BTreeMap<u32, f64>,
        fallback: f64,
    },
    Logistic { design: Design, coefs: Vec<f64> },
    Constant(f64),
}

/// Estimated `E(Y1 | aux, T = arm)` for one arm.
#[derive(Debug, Clone)]
pub struct ArmConditionalMeanModel {
    pub arm: u8,
    kind: MeanModelKind,
}

impl ArmConditionalMeanModel {
    pub fn predict(&self, rec: &SubjectRecord) -> f64 {
        match &self.kind {
            MeanModelKind::Saturated { cells, fallback } => {
                cells.get(&rec.y2).copied().unwrap_or(*fallback)
            }
            MeanModelKind::Logistic { design, coefs } => logistic_predict(design, coefs, rec),
            MeanModelKind::Constant(v) => *v,
        }
    }

    /// True when predictions cannot vary across subjects.
    pub fn is_constant(&self) -> bool {
        matches!(self.kind, MeanModelKind::Constant(_))
    }

    fn constant(arm: u8, value: f64) -> Self {
        ArmConditionalMeanModel {
            arm,
            kind: MeanModelKind::Constant(value),
        }
    }
}

fn arm_mean(records: &[&SubjectRecord]) -> f64 {
    records.iter().map(|r| f64::from(r.y1)).sum::<f64>() / records.len() as f64
}

fn saturated_model(
    arm: u8,
    records: &[&SubjectRecord],
    all_levels: &BTreeSet<u32>,
    warnings: &mut Vec<String>,
) -> ArmConditionalMeanModel {
    let mut sums: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for rec in records {
        let e = sums.entry(rec.y2).or_insert((0.0, 0.0));
        e.0 += f64::from(rec.y1);
        e.1 += 1.0;
    }
    let cells: BTreeMap<u32, f64> = sums.iter().map(|(k, (s, n))| (*k, s / n)).collect();
    let fallback = arm_mean(records);
    for level in all_levels {
        if !cells.contains_key(level) {
            warnings.push(format!(
                "arm {arm}: no subjects with negative-control count {level}; using the arm mean for that cell"
            ));
        }
    }
    ArmConditionalMeanModel {
        arm,
        kind: MeanModelKind::Saturated { cells, fallback },
    }
}

/// Fits `E(Y1 | aux, T = t)` for both arms.
///
/// With `Augmentation::Y2` and at most two distinct observed counts the
/// models are saturated cell means; otherwise each arm gets a logistic
/// regression of the primary outcome on the requested regressors (the
/// count entered linearly, covariate terms taken from
/// `regression.primary_terms`). A degenerate or separated fit falls back
/// to the constant arm mean with a warning, never a hard failure.
pub fn fit_arm_means(
    data: &Dataset,
    augmentation: Augmentation,
    regression: Option<&RegressionSpec>,
) -> Result<(ArmConditionalMeanModel, ArmConditionalMeanModel, Vec<String>), EstimatorError> {
    let treated: Vec<&SubjectRecord> = data.records().iter().filter(|r| r.t == 1).collect();
    let control: Vec<&SubjectRecord> = data.records().iter().filter(|r| r.t == 0).collect();
    if treated.is_empty() || control.is_empty() {
        return Err(EstimatorError::DegenerateArm(
            "both arms are required to fit conditional means".to_string(),
        ));
    }

    let mut warnings = Vec::new();

    let y2_levels: BTreeSet<u32> = data.records().iter().map(|r| r.y2).collect();
    if augmentation == Augmentation::Y2 && y2_levels.len() <= 2 {
        let m1 = saturated_model(1, &treated, &y2_levels, &mut warnings);
        let m0 = saturated_model(0, &control, &y2_levels, &mut warnings);
        return Ok((m1, m0, warnings));
    }

    let with_y2 = matches!(augmentation, Augmentation::Y2 | Augmentation::Y2W);
    let cov_terms = match augmentation {
        Augmentation::Y2 => &[][..],
        Augmentation::W | Augmentation::Y2W => {
            let spec = regression.ok_or_else(|| {
                EstimatorError::BadRegressor(
                    "<none>".to_string(),
                    "covariate augmentation requires a regression spec".to_string(),
                )
            })?;
            &spec.primary_terms[..]
        }
    };
    let design = Design::build(data, cov_terms, false, with_y2)?;

    let fit_arm = |arm: u8, records: &[&SubjectRecord], warnings: &mut Vec<String>| {
        let mean = arm_mean(records);
        if mean <= 0.0 || mean >= 1.0 {
            warnings.push(format!(
                "arm {arm}: all primary outcomes equal; using the constant arm mean {mean}"
            ));
            return ArmConditionalMeanModel::constant(arm, mean);
        }
        match fit_logistic(&design, records) {
            Some(coefs) => ArmConditionalMeanModel {
                arm,
                kind: MeanModelKind::Logistic {
                    design: design.clone(),
                    coefs,
                },
            },
            None => {
                warnings.push(format!(
                    "arm {arm}: logistic conditional-mean fit failed (separation or \
                     non-convergence); falling back to the constant arm mean"
                ));
                ArmConditionalMeanModel::constant(arm, mean)
            }
        }
    };

    let m1 = fit_arm(1, &treated, &mut warnings);
    let m0 = fit_arm(0, &control, &mut warnings);
    Ok((m1, m0, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::collections::BTreeMap as Map;

    fn subject(id: usize, t: u8, y1: u8, y2: u32) -> SubjectRecord {
        SubjectRecord {
            id: id.to_string(),
            t,
            y1,
            y2,
            covariates: Map::new(),
        }
    }

    fn aug_fixture() -> Dataset {
        // Treated (y1, y2): (1,1), (0,1), (0,1), (0,0);
        // control: (1,1), (1,0), (0,0), (0,0).
        let rows = vec![
            subject(1, 1, 1, 1),
            subject(2, 1, 0, 1),
            subject(3, 1, 0, 1),
            subject(4, 1, 0, 0),
            subject(5, 0, 1, 1),
            subject(6, 0, 1, 0),
            subject(7, 0, 0, 0),
            subject(8, 0, 0, 0),
        ];
        Dataset::new(rows, Map::new()).unwrap()
    }

    #[test]
    fn saturated_cell_means_match_hand_tally() {
        let data = aug_fixture();
        let (m1, m0, warnings) = fit_arm_means(&data, Augmentation::Y2, None).unwrap();
        assert!(warnings.is_empty());
        let probe1 = subject(99, 1, 0, 1);
        let probe0 = subject(99, 1, 0, 0);
        assert_abs_diff_eq!(m1.predict(&probe1), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m1.predict(&probe0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m0.predict(&probe1), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m0.predict(&probe0), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn all_zero_arm_gives_constant_zero() {
        let rows = vec![
            subject(1, 1, 0, 1),
            subject(2, 1, 0, 0),
            subject(3, 0, 1, 1),
            subject(4, 0, 0, 0),
        ];
        let data = Dataset::new(rows, Map::new()).unwrap();
        let (m1, _m0, _w) = fit_arm_means(&data, Augmentation::Y2, None).unwrap();
        assert_abs_diff_eq!(m1.predict(&subject(9, 1, 0, 1)), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m1.predict(&subject(9, 1, 0, 0)), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn many_level_counts_use_logistic_fit() {
        // y2 spans 0..5, so the saturated path does not apply.
        let mut rows = Vec::new();
        for i in 0..60 {
            let t = (i % 2) as u8;
            let y2 = (i % 6) as u32;
            let y1 = u8::from(i % 7 < 2 && y2 >= 2);
            rows.push(subject(i, t, y1, y2));
        }
        let data = Dataset::new(rows, Map::new()).unwrap();
        let (m1, m0, warnings) = fit_arm_means(&data, Augmentation::Y2, None).unwrap();
        assert!(warnings.is_empty(), "unexpected warnings: {warnings:?}");
        assert!(!m1.is_constant());
        assert!(!m0.is_constant());
        // Logistic in y2: predictions vary with the count.
        let lo = m1.predict(&subject(99, 1, 0, 0));
        let hi = m1.predict(&subject(99, 1, 0, 5));
        assert!((lo - hi).abs() > 1e-6);
        assert!(lo > 0.0 && lo < 1.0 && hi > 0.0 && hi < 1.0);
    }
}

//! Regression term specifications and design-matrix construction for the
//! model-based estimators, plus the per-arm logistic fitter used by the
//! augmented conditional-mean models.

use nalgebra::{DMatrix, DVector};
use nco_core::{CovariateKind, CovariateValue, Dataset, SubjectRecord};

use crate::error::EstimatorError;

/// How a covariate enters a regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Linear,
    Square,
    /// Expands to one indicator per level, first observed level as reference.
    CategoricalIndicators,
}

/// One regression term.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub covariate: String,
    pub transform: Transform,
}

impl Term {
    pub fn linear(name: &str) -> Self {
        Term {
            covariate: name.to_string(),
            transform: Transform::Linear,
        }
    }

    pub fn square(name: &str) -> Self {
        Term {
            covariate: name.to_string(),
            transform: Transform::Square,
        }
    }

    pub fn categorical(name: &str) -> Self {
        Term {
            covariate: name.to_string(),
            transform: Transform::CategoricalIndicators,
        }
    }
}

/// Regressor lists for the primary- and secondary-outcome models of the
/// joint regression estimator. The primary list also defines the covariate
/// part of the augmented conditional-mean models.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegressionSpec {
    pub primary_terms: Vec<Term>,
    pub secondary_terms: Vec<Term>,
}

impl RegressionSpec {
    /// Intercept-only models in both blocks.
    pub fn intercept_only() -> Self {
        RegressionSpec::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum DesignColumn {
    Intercept,
    Treatment,
    /// Negative-control count entered linearly.
    Y2,
    Power { name: String, power: i32 },
    Indicator { name: String, level: String },
}

/// A resolved design: knows how to turn a record into a regressor row.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    columns: Vec<DesignColumn>,
}

impl Design {
    /// Resolves terms against a dataset. Categorical terms expand to level
    /// indicators in order of first observation, dropping the first level
    /// as reference. `with_treatment` and `with_y2` prepend the treatment
    /// indicator and the negative-control count as regressors.
    pub fn build(
        data: &Dataset,
        terms: &[Term],
        with_treatment: bool,
        with_y2: bool,
    ) -> Result<Design, EstimatorError> {
        let mut columns = vec![DesignColumn::Intercept];
        if with_treatment {
            columns.push(DesignColumn::Treatment);
        }
        if with_y2 {
            columns.push(DesignColumn::Y2);
        }
        for term in terms {
            let kind = data.covariate_kind(&term.covariate).ok_or_else(|| {
                EstimatorError::BadRegressor(
                    term.covariate.clone(),
                    "not in the dataset schema".to_string(),
                )
            })?;
            match (term.transform, kind) {
                (Transform::Linear, CovariateKind::Numeric) => columns.push(DesignColumn::Power {
                    name: term.covariate.clone(),
                    power: 1,
                }),
                (Transform::Square, CovariateKind::Numeric) => columns.push(DesignColumn::Power {
                    name: term.covariate.clone(),
                    power: 2,
                }),
                (Transform::CategoricalIndicators, CovariateKind::Categorical) => {
                    let mut levels: Vec<String> = Vec::new();
                    for rec in data.records() {
                        if let Some(CovariateValue::Categorical(v)) =
                            rec.covariate(&term.covariate)
                        {
                            if !levels.iter().any(|l| l == v) {
                                levels.push(v.clone());
                            }
                        }
                    }
                    // First observed level is the reference.
                    for level in levels.into_iter().skip(1) {
                        columns.push(DesignColumn::Indicator {
                            name: term.covariate.clone(),
                            level,
                        });
                    }
                }
                (Transform::CategoricalIndicators, CovariateKind::Numeric) => {
                    return Err(EstimatorError::BadRegressor(
                        term.covariate.clone(),
                        "categorical transform on a numeric covariate".to_string(),
                    ))
                }
                (_, CovariateKind::Categorical) => {
                    return Err(EstimatorError::BadRegressor(
                        term.covariate.clone(),
                        "numeric transform on a categorical covariate".to_string(),
                    ))
                }
            }
        }
        Ok(Design { columns })
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    /// Column index of the treatment indicator, if present.
    pub fn treatment_index(&self) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| matches!(c, DesignColumn::Treatment))
    }

    pub fn fill_row(&self, rec: &SubjectRecord, out: &mut [f64]) {
        for (slot, col) in out.iter_mut().zip(&self.columns) {
            *slot = match col {
                DesignColumn::Intercept => 1.0,
                DesignColumn::Treatment => f64::from(rec.t),
                DesignColumn::Y2 => f64::from(rec.y2),
                DesignColumn::Power { name, power } => {
                    let v = rec
                        .covariate(name)
                        .and_then(CovariateValue::as_numeric)
                        .expect("design built against schema");
                    v.powi(*power)
                }
                DesignColumn::Indicator { name, level } => {
                    let v = rec
                        .covariate(name)
                        .and_then(CovariateValue::as_categorical)
                        .expect("design built against schema");
                    if v == level {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
        }
    }

    pub fn row(&self, rec: &SubjectRecord) -> Vec<f64> {
        let mut out = vec![0.0; self.p()];
        self.fill_row(rec, &mut out);
        out
    }

    /// Rejects designs whose Gram matrix is numerically singular.
    pub(crate) fn check_full_rank(
        &self,
        records: &[SubjectRecord],
    ) -> Result<(), EstimatorError> {
        let p = self.p();
        let mut gram = DMatrix::<f64>::zeros(p, p);
        let mut row = vec![0.0; p];
        for rec in records {
            self.fill_row(rec, &mut row);
            for i in 0..p {
                for j in 0..p {
                    gram[(i, j)] += row[i] * row[j];
                }
            }
        }
        gram /= records.len() as f64;
        let eigen = gram.symmetric_eigen();
        let max = eigen.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let min = eigen
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if !(min / max.max(1e-300)).is_finite() || min <= 1e-10 * max {
            return Err(EstimatorError::RankDeficientDesign(format!(
                "smallest Gram eigenvalue {min:.3e} vs largest {max:.3e}"
            )));
        }
        Ok(())
    }
}

/// Per-arm logistic regression fit by Newton's method.
///
/// Returns the coefficient vector, or `None` when the fit is unusable
/// (separation, singular information, or no convergence); callers fall
/// back to a constant arm mean in that case.
pub(crate) fn fit_logistic(design: &Design, records: &[&SubjectRecord]) -> Option<Vec<f64>> {
    let p = design.p();
    let n = records.len();
    let rows: Vec<Vec<f64>> = records.iter().map(|r| design.row(r)).collect();
    let ys: Vec<f64> = records.iter().map(|r| f64::from(r.y1)).collect();

    let mean = ys.iter().sum::<f64>() / n as f64;
    if mean <= 0.0 || mean >= 1.0 {
        return None;
    }
    let mut theta = vec![0.0; p];
    theta[0] = (mean / (1.0 - mean)).ln();

    let tol = (1e-10 * n as f64).max(1e-8);
    for _ in 0..50 {
        let mut grad = DVector::<f64>::zeros(p);
        let mut info = DMatrix::<f64>::zeros(p, p);
        for (row, &y) in rows.iter().zip(&ys) {
            let lp: f64 = row.iter().zip(&theta).map(|(x, t)| x * t).sum();
            let mu = 1.0 / (1.0 + (-lp).exp());
            let w = mu * (1.0 - mu);
            for i in 0..p {
                grad[i] += (y - mu) * row[i];
                for j in 0..p {
                    info[(i, j)] += w * row[i] * row[j];
                }
            }
        }
        let norm = grad.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if norm <= tol {
            return Some(theta);
        }
        let step = info.lu().solve(&grad)?;
        if step.iter().any(|x| !x.is_finite()) {
            return None;
        }
        for (t, s) in theta.iter_mut().zip(step.iter()) {
            *t += s;
        }
        // Diverging coefficients signal separation.
        if theta.iter().any(|t| t.abs() > 30.0) {
            return None;
        }
    }
    None
}

pub(crate) fn logistic_predict(design: &Design, theta: &[f64], rec: &SubjectRecord) -> f64 {
    let mut row = vec![0.0; design.p()];
    design.fill_row(rec, &mut row);
    let lp: f64 = row.iter().zip(theta).map(|(x, t)| x * t).sum();
    1.0 / (1.0 + (-lp).exp())
}

//! Dispatch from a method tag to the corresponding estimator, plus the
//! default stratification and regression choices used when analyzing
//! simulated cohorts (site-by-age strata; age, age squared, and site
//! indicators as regression terms).

use nco_core::{Dataset, EstimateResult, Method, StratumSpec};
use nco_estimators::{
    estimate_aug, estimate_joint_mh_with, estimate_joint_nc, estimate_joint_reg,
    estimate_mh_with, estimate_ss_joint, estimate_unaug, Augmentation, BootstrapOptions,
    EstimatorError, RegressionSpec, Term,
};
use nco_simulator::AGE_LEVELS;

/// Everything a method might need beyond the dataset.
#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub strata: Option<StratumSpec>,
    pub regression: Option<RegressionSpec>,
    pub ci_level: f64,
    pub bootstrap: BootstrapOptions,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            strata: None,
            regression: None,
            ci_level: 0.95,
            bootstrap: BootstrapOptions::default(),
        }
    }
}

/// Site-by-age stratification over the simulator's covariate grid: one bin
/// per age level.
pub fn default_simulated_strata() -> StratumSpec {
    StratumSpec::new(vec!["site".to_string(), "age".to_string()])
        .with_cuts("age", AGE_LEVELS[1..].to_vec())
}

/// Flexible default regression terms for simulated cohorts: age, age
/// squared, and site indicators in both outcome models.
pub fn default_simulated_regression() -> RegressionSpec {
    let terms = vec![
        Term::linear("age"),
        Term::square("age"),
        Term::categorical("site"),
    ];
    RegressionSpec {
        primary_terms: terms.clone(),
        secondary_terms: terms,
    }
}

fn need_strata<'a>(
    options: &'a AnalysisOptions,
    method: Method,
) -> Result<&'a StratumSpec, EstimatorError> {
    options.strata.as_ref().ok_or_else(|| {
        EstimatorError::BadRegressor(
            method.to_string(),
            "a stratum specification is required".to_string(),
        )
    })
}

fn need_regression<'a>(
    options: &'a AnalysisOptions,
    method: Method,
) -> Result<&'a RegressionSpec, EstimatorError> {
    options.regression.as_ref().ok_or_else(|| {
        EstimatorError::BadRegressor(
            method.to_string(),
            "a regression specification is required".to_string(),
        )
    })
}

/// Runs one estimation method on a dataset.
pub fn run_method(
    data: &Dataset,
    method: Method,
    options: &AnalysisOptions,
) -> Result<EstimateResult, EstimatorError> {
    match method {
        Method::UnAug => estimate_unaug(data, options.ci_level),
        Method::Aug => estimate_aug(
            data,
            Augmentation::Y2,
            options.regression.as_ref(),
            options.ci_level,
        ),
        Method::AugW => estimate_aug(
            data,
            Augmentation::W,
            Some(need_regression(options, method)?),
            options.ci_level,
        ),
        Method::AugY2W => estimate_aug(
            data,
            Augmentation::Y2W,
            Some(need_regression(options, method)?),
            options.ci_level,
        ),
        Method::Mh => estimate_mh_with(
            data,
            need_strata(options, method)?,
            options.ci_level,
            &options.bootstrap,
        ),
        Method::JointNc => estimate_joint_nc(data, options.ci_level),
        Method::SsJoint => estimate_ss_joint(data, need_strata(options, method)?, options.ci_level),
        Method::JointMh => estimate_joint_mh_with(
            data,
            need_strata(options, method)?,
            options.ci_level,
            &options.bootstrap,
        ),
        Method::JointReg => {
            estimate_joint_reg(data, need_regression(options, method)?, options.ci_level)
        }
    }
}

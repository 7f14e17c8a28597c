//! Augmented two-arm estimation: the saturated score plus a mean-zero
//! function of post-randomization auxiliary data (the negative-control
//! count and/or baseline covariates), after Zhang, Tsiatis & Davidian
//! (2008). Under randomization the augmentation term has expectation zero,
//! so the estimator stays unbiased while shedding variance.

use nco_core::{Dataset, Diagnostics, EstimateResult, Method};
use nco_mestimation::sandwich_covariance;

use crate::arm_means::{fit_arm_means, Augmentation};
use crate::error::EstimatorError;
use crate::regression::RegressionSpec;
use crate::systems::AugmentedTwoArmSystem;
use crate::unaug::{arm_totals, check_primary_arms};

/// Augmented log relative risk.
///
/// The treatment probability is always estimated as the sample share of
/// treated subjects; the closed-form solution of the augmented estimating
/// equation is exact because the centered treatment indicators sum to zero
/// under that choice.
pub fn estimate_aug(
    data: &Dataset,
    augmentation: Augmentation,
    regression: Option<&RegressionSpec>,
    ci_level: f64,
) -> Result<EstimateResult, EstimatorError> {
    let totals = arm_totals(data);
    check_primary_arms(&totals)?;

    let n = data.n() as f64;
    let pi1_hat = totals.n1 / n;

    let (treated_mean, control_mean, warnings) = fit_arm_means(data, augmentation, regression)?;

    let mut adj1 = 0.0;
    let mut adj0 = 0.0;
    for rec in data.records() {
        let t = f64::from(rec.t);
        let y = f64::from(rec.y1);
        let c = t - pi1_hat;
        adj1 += t * y - c * treated_mean.predict(rec);
        adj0 += (1.0 - t) * y + c * control_mean.predict(rec);
    }
    let m1 = adj1 / totals.n1;
    let m0 = adj0 / totals.n0;
    if m1 <= 0.0 || m0 <= 0.0 {
        return Err(EstimatorError::NonpositiveAdjustedMean {
            treated: m1,
            control: m0,
        });
    }
    if m1 >= 1.0 || m0 >= 1.0 {
        return Err(EstimatorError::AdjustedMeanOutOfRange {
            treated: m1,
            control: m0,
        });
    }

    let beta1 = (m1 / m0).ln();
    let theta = [m0.ln(), beta1];
    let system = AugmentedTwoArmSystem {
        pi1_hat,
        treated_mean,
        control_mean,
    };
    let cov = sandwich_covariance(&system, data, &theta)?;
    let std_err = cov[(1, 1)].max(0.0).sqrt();

    let method = match augmentation {
        Augmentation::Y2 => Method::Aug,
        Augmentation::W => Method::AugW,
        Augmentation::Y2W => Method::AugY2W,
    };
    Ok(EstimateResult::from_estimate(
        method,
        beta1,
        std_err,
        ci_level,
        None,
        Diagnostics {
            solver_iterations: 0,
            excluded_strata: Vec::new(),
            warnings,
        },
    ))
}

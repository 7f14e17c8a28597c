//! Joint estimation with no covariates: fit treatment effects on the
//! primary outcome and on the negative-control count from one stacked
//! score, and report their difference. Confounders that inflate (or
//! deflate) both outcomes proportionally cancel in the difference.

use nco_core::{Dataset, Diagnostics, EstimateResult, Method};
use nco_mestimation::{contrast_variance, sandwich_covariance};

use crate::error::EstimatorError;
use crate::systems::JointNcSystem;
use crate::unaug::arm_totals;

/// Joint no-covariate estimate `beta1_star - beta2_star`, where the stars
/// are the apparent treatment effects on the primary outcome and on the
/// negative-control count. The standard error comes from the stacked
/// sandwich and the contrast `(0, 1, 0, -1)`, which subtracts twice the
/// covariance of the component estimates.
pub fn estimate_joint_nc(
    data: &Dataset,
    ci_level: f64,
) -> Result<EstimateResult, EstimatorError> {
    let totals = arm_totals(data);
    crate::unaug::check_primary_arms(&totals)?;
    if totals.y2_sum1 < 1.0 {
        return Err(EstimatorError::DegenerateNegativeControl(
            "no negative-control events in the treated arm".to_string(),
        ));
    }
    if totals.y2_sum0 < 1.0 {
        return Err(EstimatorError::DegenerateNegativeControl(
            "no negative-control events in the control arm".to_string(),
        ));
    }

    let p1_1 = totals.events1 / totals.n1;
    let p1_0 = totals.events0 / totals.n0;
    let p2_1 = totals.y2_sum1 / totals.n1;
    let p2_0 = totals.y2_sum0 / totals.n0;

    let beta1_star = (p1_1 / p1_0).ln();
    let beta2_star = (p2_1 / p2_0).ln();
    let beta1 = beta1_star - beta2_star;

    let theta = [p1_0.ln(), beta1_star, p2_0.ln(), beta2_star];
    let cov = sandwich_covariance(&JointNcSystem, data, &theta)?;
    let variance = contrast_variance(&cov, &[0.0, 1.0, 0.0, -1.0])?;
    let std_err = variance.max(0.0).sqrt();

    Ok(EstimateResult::from_estimate(
        Method::JointNc,
        beta1,
        std_err,
        ci_level,
        Some((beta1_star, beta2_star)),
        Diagnostics::default(),
    ))
}

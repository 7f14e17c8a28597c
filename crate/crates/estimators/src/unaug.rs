use nco_core::{Dataset, Diagnostics, EstimateResult, Method};
use nco_mestimation::sandwich_covariance;

use crate::error::EstimatorError;
use crate::systems::TwoArmLogRiskSystem;

pub(crate) struct ArmTotals {
    pub n1: f64,
    pub n0: f64,
    pub events1: f64,
    pub events0: f64,
    pub y2_sum1: f64,
    pub y2_sum0: f64,
}

pub(crate) fn arm_totals(data: &Dataset) -> ArmTotals {
    let mut t = ArmTotals {
        n1: 0.0,
        n0: 0.0,
        events1: 0.0,
        events0: 0.0,
        y2_sum1: 0.0,
        y2_sum0: 0.0,
    };
    for rec in data.records() {
        if rec.t == 1 {
            t.n1 += 1.0;
            t.events1 += f64::from(rec.y1);
            t.y2_sum1 += f64::from(rec.y2);
        } else {
            t.n0 += 1.0;
            t.events0 += f64::from(rec.y1);
            t.y2_sum0 += f64::from(rec.y2);
        }
    }
    t
}

pub(crate) fn check_primary_arms(t: &ArmTotals) -> Result<(), EstimatorError> {
    if t.n1 < 1.0 || t.n0 < 1.0 {
        return Err(EstimatorError::DegenerateArm(
            "both treatment arms must be nonempty".to_string(),
        ));
    }
    if t.events1 < 1.0 {
        return Err(EstimatorError::DegenerateArm(
            "no primary events in the treated arm".to_string(),
        ));
    }
    if t.events0 < 1.0 {
        return Err(EstimatorError::DegenerateArm(
            "no primary events in the control arm".to_string(),
        ));
    }
    if t.events1 >= t.n1 || t.events0 >= t.n0 {
        return Err(EstimatorError::DegenerateArm(
            "an arm has event rate 1; log-risk mean must be below 1".to_string(),
        ));
    }
    Ok(())
}

/// Unaugmented two-arm log relative risk: `log(p1_hat / p0_hat)` with the
/// sandwich standard error of the saturated two-arm score.
pub fn estimate_unaug(data: &Dataset, ci_level: f64) -> Result<EstimateResult, EstimatorError> {
    let totals = arm_totals(data);
    check_primary_arms(&totals)?;

    let p1 = totals.events1 / totals.n1;
    let p0 = totals.events0 / totals.n0;
    let beta1 = (p1 / p0).ln();
    let theta = [p0.ln(), beta1];

    let cov = sandwich_covariance(&TwoArmLogRiskSystem, data, &theta)?;
    let std_err = cov[(1, 1)].max(0.0).sqrt();

    Ok(EstimateResult::from_estimate(
        Method::UnAug,
        beta1,
        std_err,
        ci_level,
        None,
        Diagnostics::default(),
    ))
}

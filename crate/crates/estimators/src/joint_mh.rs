//! Joint Mantel-Haenszel estimation: the log of the ratio of two
//! stratified MH-type estimates, one for the primary outcome and one for
//! the negative-control count. Stratum-level confounding multipliers
//! shared by the two outcomes cancel in the ratio.

use nco_core::{Dataset, Diagnostics, EstimateResult, Method, StratumSpec};

use crate::bootstrap::{bootstrap_se, BootstrapOptions};
use crate::error::EstimatorError;
use crate::mh::{mh_sums_from_counts, mh_sums_from_indices, single_arm_strata, StratifiedData};

/// Joint MH estimate with default bootstrap settings.
pub fn estimate_joint_mh(
    data: &Dataset,
    spec: &StratumSpec,
    ci_level: f64,
) -> Result<EstimateResult, EstimatorError> {
    estimate_joint_mh_with(data, spec, ci_level, &BootstrapOptions::default())
}

/// Joint MH estimate `log(primary MH ratio) - log(secondary MH ratio)`
/// with explicit bootstrap controls.
pub fn estimate_joint_mh_with(
    data: &Dataset,
    spec: &StratumSpec,
    ci_level: f64,
    bootstrap: &BootstrapOptions,
) -> Result<EstimateResult, EstimatorError> {
    let (sd, counts) = StratifiedData::extract(data, spec)?;
    let sums = mh_sums_from_counts(&counts);
    if sums.primary_num <= 0.0
        || sums.primary_den <= 0.0
        || sums.secondary_num <= 0.0
        || sums.secondary_den <= 0.0
    {
        return Err(EstimatorError::AllStrataDegenerate);
    }
    let beta1_star = (sums.primary_num / sums.primary_den).ln();
    let beta2_star = (sums.secondary_num / sums.secondary_den).ln();
    let beta1 = beta1_star - beta2_star;

    let (se, skipped) = bootstrap_se(data.n(), bootstrap, |indices| {
        let s = mh_sums_from_indices(&sd, indices);
        if s.primary_num > 0.0
            && s.primary_den > 0.0
            && s.secondary_num > 0.0
            && s.secondary_den > 0.0
        {
            Some((s.primary_num / s.primary_den).ln() - (s.secondary_num / s.secondary_den).ln())
        } else {
            None
        }
    });
    let std_err = se.ok_or(EstimatorError::BootstrapDegenerate)?;

    let mut warnings = Vec::new();
    if skipped > 0 {
        warnings.push(format!(
            "{skipped} of {} bootstrap replicates were degenerate and skipped",
            bootstrap.replicates
        ));
    }
    Ok(EstimateResult::from_estimate(
        Method::JointMh,
        beta1,
        std_err,
        ci_level,
        Some((beta1_star, beta2_star)),
        Diagnostics {
            solver_iterations: 0,
            excluded_strata: single_arm_strata(&counts),
            warnings,
        },
    ))
}

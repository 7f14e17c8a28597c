//! Stratum-specific joint estimation: the joint no-covariate estimator run
//! inside each stratum, combined by inverse-variance weighting.

use nco_core::{stratum_assignments, Dataset, Diagnostics, EstimateResult, Method, StratumSpec};

use crate::error::EstimatorError;
use crate::joint_nc::estimate_joint_nc;

/// Inverse-variance pooling of `(estimate, variance)` pairs.
///
/// Returns the weighted mean with weights `1/variance` and the pooled
/// variance `1 / sum(weights)`.
pub fn pool_inverse_variance(estimates: &[(f64, f64)]) -> (f64, f64) {
    let mut wsum = 0.0;
    let mut acc = 0.0;
    for &(est, var) in estimates {
        let w = 1.0 / var;
        wsum += w;
        acc += w * est;
    }
    (acc / wsum, 1.0 / wsum)
}

/// Per-stratum joint no-covariate estimates pooled by inverse variance.
///
/// A stratum is usable when all four event sums (primary and
/// negative-control, both arms) are positive; unusable strata are excluded
/// and listed in the diagnostics. Pooled components use the same weights
/// as the pooled estimate, so `beta1 = beta1_star - beta2_star` is
/// preserved exactly.
pub fn estimate_ss_joint(
    data: &Dataset,
    spec: &StratumSpec,
    ci_level: f64,
) -> Result<EstimateResult, EstimatorError> {
    let (counts, assignment) = stratum_assignments(data, spec)?;
    let k = counts.len();

    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (idx, &s) in assignment.iter().enumerate() {
        groups[s].push(idx);
    }

    let mut excluded = Vec::new();
    let mut warnings = Vec::new();
    let mut per_stratum: Vec<(f64, f64, f64, f64)> = Vec::new(); // (b, var, b1*, b2*)
    for (s, c) in counts.iter().enumerate() {
        if c.x1k == 0 || c.z1k == 0 || c.x2k == 0 || c.z2k == 0 {
            excluded.push(c.stratum_label.clone());
            continue;
        }
        let records: Vec<_> = groups[s]
            .iter()
            .map(|&i| data.records()[i].clone())
            .collect();
        let stratum_data = Dataset::new(records, data.schema().clone())?;
        match estimate_joint_nc(&stratum_data, ci_level) {
            Ok(r) => {
                let (b1s, b2s) = r.components.expect("joint method reports components");
                per_stratum.push((r.beta1_hat, r.std_err * r.std_err, b1s, b2s));
            }
            Err(e) => {
                excluded.push(c.stratum_label.clone());
                warnings.push(format!(
                    "stratum {}: excluded ({e})",
                    c.stratum_label
                ));
            }
        }
    }

    if per_stratum.is_empty() {
        return Err(EstimatorError::AllStrataDegenerate);
    }

    let pairs: Vec<(f64, f64)> = per_stratum.iter().map(|&(b, v, _, _)| (b, v)).collect();
    let (_, variance) = pool_inverse_variance(&pairs);

    // Pool the components with the same weights and difference them, so the
    // beta1 = beta1_star - beta2_star identity holds bit-exactly.
    let wsum: f64 = per_stratum.iter().map(|&(_, v, _, _)| 1.0 / v).sum();
    let beta1_star = per_stratum
        .iter()
        .map(|&(_, v, b1s, _)| b1s / v)
        .sum::<f64>()
        / wsum;
    let beta2_star = per_stratum
        .iter()
        .map(|&(_, v, _, b2s)| b2s / v)
        .sum::<f64>()
        / wsum;
    let beta1 = beta1_star - beta2_star;

    Ok(EstimateResult::from_estimate(
        Method::SsJoint,
        beta1,
        variance.sqrt(),
        ci_level,
        Some((beta1_star, beta2_star)),
        Diagnostics {
            solver_iterations: 0,
            excluded_strata: excluded,
            warnings,
        },
    ))
}

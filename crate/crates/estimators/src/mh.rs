//! Mantel-Haenszel-type stratified relative-risk estimation (weights as in
//! Tarone, 1981). Point estimates are ratios of stratum-weighted event
//! sums; standard errors come from a subject-level nonparametric bootstrap
//! on the log scale.

use nco_core::{
    stratum_assignments, Dataset, Diagnostics, EstimateResult, Method, StratumCounts, StratumSpec,
};

use crate::bootstrap::{bootstrap_se, BootstrapOptions};
use crate::error::EstimatorError;

/// Per-record stratum membership plus the outcome columns, extracted once
/// so bootstrap replicates reduce to cheap integer tallies.
pub(crate) struct StratifiedData {
    pub k: usize,
    pub stratum: Vec<usize>,
    pub t: Vec<u8>,
    pub y1: Vec<u8>,
    pub y2: Vec<u32>,
}

impl StratifiedData {
    pub(crate) fn extract(
        data: &Dataset,
        spec: &StratumSpec,
    ) -> Result<(Self, Vec<StratumCounts>), EstimatorError> {
        let (counts, assignment) = stratum_assignments(data, spec)?;
        let recs = data.records();
        Ok((
            StratifiedData {
                k: counts.len(),
                stratum: assignment,
                t: recs.iter().map(|r| r.t).collect(),
                y1: recs.iter().map(|r| r.y1).collect(),
                y2: recs.iter().map(|r| r.y2).collect(),
            },
            counts,
        ))
    }
}

/// The four stratum-weighted sums common to the primary and secondary
/// Mantel-Haenszel ratios.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MhSums {
    /// sum_k n0k * x1k / nk
    pub primary_num: f64,
    /// sum_k n1k * z1k / nk
    pub primary_den: f64,
    /// sum_k n0k * x2k / nk
    pub secondary_num: f64,
    /// sum_k n1k * z2k / nk
    pub secondary_den: f64,
}

pub(crate) fn mh_sums_from_counts(counts: &[StratumCounts]) -> MhSums {
    let mut sums = MhSums {
        primary_num: 0.0,
        primary_den: 0.0,
        secondary_num: 0.0,
        secondary_den: 0.0,
    };
    for c in counts {
        if c.nk == 0 {
            continue;
        }
        let nk = c.nk as f64;
        let n1k = c.n1k as f64;
        let n0k = c.n0k as f64;
        sums.primary_num += n0k * c.x1k as f64 / nk;
        sums.primary_den += n1k * c.z1k as f64 / nk;
        sums.secondary_num += n0k * c.x2k as f64 / nk;
        sums.secondary_den += n1k * c.z2k as f64 / nk;
    }
    sums
}

pub(crate) fn mh_sums_from_indices(sd: &StratifiedData, indices: &[usize]) -> MhSums {
    let k = sd.k;
    let mut n1 = vec![0.0f64; k];
    let mut n0 = vec![0.0f64; k];
    let mut x1 = vec![0.0f64; k];
    let mut z1 = vec![0.0f64; k];
    let mut x2 = vec![0.0f64; k];
    let mut z2 = vec![0.0f64; k];
    for &i in indices {
        let s = sd.stratum[i];
        if sd.t[i] == 1 {
            n1[s] += 1.0;
            x1[s] += f64::from(sd.y1[i]);
            x2[s] += f64::from(sd.y2[i]);
        } else {
            n0[s] += 1.0;
            z1[s] += f64::from(sd.y1[i]);
            z2[s] += f64::from(sd.y2[i]);
        }
    }
    let mut sums = MhSums {
        primary_num: 0.0,
        primary_den: 0.0,
        secondary_num: 0.0,
        secondary_den: 0.0,
    };
    for s in 0..k {
        let nk = n1[s] + n0[s];
        if nk == 0.0 {
            continue;
        }
        sums.primary_num += n0[s] * x1[s] / nk;
        sums.primary_den += n1[s] * z1[s] / nk;
        sums.secondary_num += n0[s] * x2[s] / nk;
        sums.secondary_den += n1[s] * z2[s] / nk;
    }
    sums
}

pub(crate) fn single_arm_strata(counts: &[StratumCounts]) -> Vec<String> {
    counts
        .iter()
        .filter(|c| c.n1k == 0 || c.n0k == 0)
        .map(|c| c.stratum_label.clone())
        .collect()
}

/// Stratified Mantel-Haenszel log relative risk with default bootstrap
/// settings (500 replicates).
pub fn estimate_mh(
    data: &Dataset,
    spec: &StratumSpec,
    ci_level: f64,
) -> Result<EstimateResult, EstimatorError> {
    estimate_mh_with(data, spec, ci_level, &BootstrapOptions::default())
}

/// Stratified Mantel-Haenszel log relative risk with explicit bootstrap
/// controls. Strata missing one arm carry zero weight in both sums and are
/// listed in the diagnostics.
pub fn estimate_mh_with(
    data: &Dataset,
    spec: &StratumSpec,
    ci_level: f64,
    bootstrap: &BootstrapOptions,
) -> Result<EstimateResult, EstimatorError> {
    let (sd, counts) = StratifiedData::extract(data, spec)?;
    let sums = mh_sums_from_counts(&counts);
    if sums.primary_num <= 0.0 || sums.primary_den <= 0.0 {
        return Err(EstimatorError::AllStrataDegenerate);
    }
    let beta1 = (sums.primary_num / sums.primary_den).ln();

    let (se, skipped) = bootstrap_se(data.n(), bootstrap, |indices| {
        let s = mh_sums_from_indices(&sd, indices);
        if s.primary_num > 0.0 && s.primary_den > 0.0 {
            Some((s.primary_num / s.primary_den).ln())
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
        Method::Mh,
        beta1,
        std_err,
        ci_level,
        None,
        Diagnostics {
            solver_iterations: 0,
            excluded_strata: single_arm_strata(&counts),
            warnings,
        },
    ))
}

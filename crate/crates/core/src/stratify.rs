//! Stratification of a dataset on covariate keys, producing the per-stratum
//! sufficient statistics used by the Mantel-Haenszel-type estimators.

use std::collections::BTreeMap;

use crate::error::CoreError;
use crate::types::{CovariateKind, CovariateValue, Dataset};

/// Which covariates define the strata, and how numeric covariates are
/// binned. Numeric keys must come with cut points; bins are half-open:
/// `(-inf, c1), [c1, c2), ..., [ck, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumSpec {
    pub keys: Vec<String>,
    pub numeric_cuts: BTreeMap<String, Vec<f64>>,
}

impl StratumSpec {
    pub fn new(keys: Vec<String>) -> Self {
        StratumSpec {
            keys,
            numeric_cuts: BTreeMap::new(),
        }
    }

    pub fn with_cuts(mut self, name: &str, cuts: Vec<f64>) -> Self {
        self.numeric_cuts.insert(name.to_string(), cuts);
        self
    }

    /// Checks the spec against a dataset schema: keys exist, numeric keys
    /// have strictly ascending cuts, cuts only name numeric keys.
    pub fn validate(&self, dataset: &Dataset) -> Result<(), CoreError> {
        for key in &self.keys {
            match dataset.covariate_kind(key) {
                None => return Err(CoreError::UnknownStratumKey(key.clone())),
                Some(CovariateKind::Numeric) => {
                    let cuts = self
                        .numeric_cuts
                        .get(key)
                        .ok_or_else(|| CoreError::UnbinnedNumericKey(key.clone()))?;
                    if cuts.is_empty() {
                        return Err(CoreError::UnbinnedNumericKey(key.clone()));
                    }
                    if cuts.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(CoreError::NonAscendingCuts(key.clone()));
                    }
                }
                Some(CovariateKind::Categorical) => {}
            }
        }
        for name in self.numeric_cuts.keys() {
            match dataset.covariate_kind(name) {
                Some(CovariateKind::Numeric) => {}
                Some(CovariateKind::Categorical) => {
                    return Err(CoreError::CutsForNonNumericKey(name.clone()))
                }
                None => return Err(CoreError::UnknownStratumKey(name.clone())),
            }
        }
        Ok(())
    }
}

/// Per-stratum sufficient statistics: event totals and arm sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumCounts {
    pub stratum_label: String,
    /// Treated primary events.
    pub x1k: u64,
    /// Control primary events.
    pub z1k: u64,
    /// Treated negative-control count sum.
    pub x2k: u64,
    /// Control negative-control count sum.
    pub z2k: u64,
    /// Treated subjects.
    pub n1k: u64,
    /// Control subjects.
    pub n0k: u64,
    /// Total subjects.
    pub nk: u64,
}

/// Sort key for one covariate within a stratum: categorical label or bin index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum KeyPart {
    Cat(String),
    Bin(usize),
}

fn bin_index(cuts: &[f64], value: f64) -> usize {
    // Index i such that value lies in [cuts[i-1], cuts[i]); 0 is (-inf, cuts[0]).
    cuts.iter().take_while(|&&c| value >= c).count()
}

fn bin_label(cuts: &[f64], idx: usize) -> String {
    let lo = if idx == 0 {
        "-inf".to_string()
    } else {
        format!("{}", cuts[idx - 1])
    };
    let hi = if idx == cuts.len() {
        "inf".to_string()
    } else {
        format!("{}", cuts[idx])
    };
    if idx == 0 {
        format!("({lo},{hi})")
    } else {
        format!("[{lo},{hi})")
    }
}

fn record_key(
    dataset: &Dataset,
    spec: &StratumSpec,
    rec_idx: usize,
) -> (Vec<KeyPart>, String) {
    let rec = &dataset.records()[rec_idx];
    let mut parts = Vec::with_capacity(spec.keys.len());
    let mut labels = Vec::with_capacity(spec.keys.len());
    for key in &spec.keys {
        match rec.covariate(key).expect("validated key") {
            CovariateValue::Categorical(v) => {
                parts.push(KeyPart::Cat(v.clone()));
                labels.push(format!("{key}={v}"));
            }
            CovariateValue::Numeric(v) => {
                let cuts = &spec.numeric_cuts[key];
                let idx = bin_index(cuts, *v);
                parts.push(KeyPart::Bin(idx));
                labels.push(format!("{key}={}", bin_label(cuts, idx)));
            }
        }
    }
    (parts, labels.join("|"))
}

/// Groups the dataset into strata and tallies the per-stratum counts.
///
/// One `StratumCounts` per observed stratum combination, in deterministic
/// key order. The counts partition the dataset: stratum sizes sum to `n`
/// and event sums match the whole-dataset totals.
pub fn stratify(dataset: &Dataset, spec: &StratumSpec) -> Result<Vec<StratumCounts>, CoreError> {
    let (counts, _) = stratum_assignments(dataset, spec)?;
    Ok(counts)
}

/// Like [`stratify`], but also returns each record's stratum index
/// (positions into the returned counts vector). Used by resampling code
/// that needs per-subject stratum membership.
pub fn stratum_assignments(
    dataset: &Dataset,
    spec: &StratumSpec,
) -> Result<(Vec<StratumCounts>, Vec<usize>), CoreError> {
    spec.validate(dataset)?;

    let mut order: BTreeMap<Vec<KeyPart>, (String, usize)> = BTreeMap::new();
    let mut keys = Vec::with_capacity(dataset.n());
    for idx in 0..dataset.n() {
        let (parts, label) = record_key(dataset, spec, idx);
        keys.push(parts.clone());
        order.entry(parts).or_insert((label, usize::MAX));
    }
    for (slot, entry) in order.values_mut().enumerate() {
        entry.1 = slot;
    }

    let mut counts: Vec<StratumCounts> = order
        .values()
        .map(|(label, _)| StratumCounts {
            stratum_label: label.clone(),
            x1k: 0,
            z1k: 0,
            x2k: 0,
            z2k: 0,
            n1k: 0,
            n0k: 0,
            nk: 0,
        })
        .collect();

    let mut assignment = Vec::with_capacity(dataset.n());
    for (idx, parts) in keys.iter().enumerate() {
        let slot = order[parts].1;
        assignment.push(slot);
        let rec = &dataset.records()[idx];
        let c = &mut counts[slot];
        c.nk += 1;
        if rec.t == 1 {
            c.n1k += 1;
            c.x1k += u64::from(rec.y1);
            c.x2k += u64::from(rec.y2);
        } else {
            c.n0k += 1;
            c.z1k += u64::from(rec.y1);
            c.z2k += u64::from(rec.y2);
        }
    }
    Ok((counts, assignment))
}

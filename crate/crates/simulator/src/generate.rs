//! Cohort generation. A draw is a pure function of `(config, seed)`:
//! identical inputs give byte-identical datasets, and replicate seeds are
//! derived through the counter-based scheme in `nco_core::derive_seed`,
//! so any subset of replicates can run on any worker.

use std::collections::BTreeMap;

use nco_core::{CovariateKind, CovariateValue, Dataset, SubjectRecord};
use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64;

use crate::config::{GeneratorConfig, StudyDesign, AGE_LEVELS, N_AGES, N_SITES};
use crate::error::SimulatorError;

/// A generated dataset plus the hidden per-subject risk multiplier, kept
/// out of the dataset on purpose (the estimators must not see it) but
/// returned for diagnostics.
pub struct GeneratedCohort {
    pub dataset: Dataset,
    pub risk_trace: Vec<f64>,
}

/// Simulates a cohort of `config.n` subjects.
pub fn generate(config: &GeneratorConfig, seed: u64) -> Result<GeneratedCohort, SimulatorError> {
    config.validate()?;
    let mut rng = Pcg64::seed_from_u64(seed);

    // Rates excluding the risk multiplier, per type, indexed
    // [site][age][t]; the subject loop only multiplies by `a`.
    let rate_table = |ty: &crate::config::OutcomeType| -> Vec<[[f64; 2]; N_AGES]> {
        (0..N_SITES)
            .map(|site| {
                let mut by_age = [[0.0; 2]; N_AGES];
                for (age_idx, &age) in AGE_LEVELS.iter().enumerate() {
                    by_age[age_idx] = [ty.rate(site, age, 0), ty.rate(site, age, 1)];
                }
                by_age
            })
            .collect()
    };
    let primary_rates: Vec<_> = config.primary_types.iter().map(&rate_table).collect();
    let secondary_rates: Vec<_> = config.secondary_types.iter().map(&rate_table).collect();

    let normalizer = config.treatment_normalizer();
    let mut p_treat = vec![[[0.0f64; 3]; N_AGES]; N_SITES];
    if config.design == StudyDesign::Observational {
        for (site, by_age) in p_treat.iter_mut().enumerate() {
            for (age_idx, cell) in by_age.iter_mut().enumerate() {
                for (level, slot) in cell.iter_mut().enumerate() {
                    let a = config.unmeasured.values[level];
                    *slot = config.treatment_prob(site, AGE_LEVELS[age_idx], a, normalizer);
                }
            }
        }
    }

    let mut records = Vec::with_capacity(config.n);
    let mut risk_trace = Vec::with_capacity(config.n);
    for i in 0..config.n {
        let site = rng.random_range(0..N_SITES);
        let age_idx = rng.random_range(0..N_AGES);

        let u: f64 = rng.random();
        let mut level = 2;
        let mut acc = 0.0;
        for l in 0..3 {
            acc += config.unmeasured.prob(site, age_idx, l);
            if u < acc {
                level = l;
                break;
            }
        }
        let a = config.unmeasured.values[level];

        let p_t = match config.design {
            StudyDesign::Randomized => 0.5,
            StudyDesign::Observational => p_treat[site][age_idx][level],
        };
        let t = u8::from(rng.random::<f64>() < p_t);

        let mut y1 = 0u8;
        for rates in &primary_rates {
            let p = a * rates[site][age_idx][usize::from(t)];
            if rng.random::<f64>() < p {
                y1 = 1;
            }
        }
        let mut y2 = 0u32;
        for rates in &secondary_rates {
            let p = a * rates[site][age_idx][usize::from(t)];
            if rng.random::<f64>() < p {
                y2 += 1;
            }
        }

        let mut covariates = BTreeMap::new();
        covariates.insert(
            "site".to_string(),
            CovariateValue::Categorical(site.to_string()),
        );
        covariates.insert(
            "age".to_string(),
            CovariateValue::Numeric(AGE_LEVELS[age_idx]),
        );
        records.push(SubjectRecord {
            id: (i + 1).to_string(),
            t,
            y1,
            y2,
            covariates,
        });
        risk_trace.push(a);
    }

    let mut schema = BTreeMap::new();
    schema.insert("site".to_string(), CovariateKind::Categorical);
    schema.insert("age".to_string(), CovariateKind::Numeric);
    let dataset = Dataset::new(records, schema)?;
    Ok(GeneratedCohort {
        dataset,
        risk_trace,
    })
}

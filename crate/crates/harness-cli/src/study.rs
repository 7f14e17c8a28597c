//! Monte Carlo study runner: generate a cohort per replication, run each
//! requested method, and aggregate bias, variance, coverage, and failure
//! counts against the enumerated true effect.
//!
//! Replication seeds are derived from the study seed by counter, and the
//! per-replication results are collected in replication order before any
//! aggregation, so summaries are identical for any worker count.

use nco_core::{derive_seed, Method};
use nco_estimators::{report_correlation, BootstrapOptions};
use nco_simulator::{generate, prepare, true_beta1_composite, ScenarioConfig, StudyDesign};
use rayon::prelude::*;

use crate::error::HarnessError;
use crate::methods::{
    default_simulated_regression, default_simulated_strata, run_method, AnalysisOptions,
};

/// Study controls. `n: None` keeps the scenario's cohort size.
#[derive(Debug, Clone)]
pub struct StudyOptions {
    pub reps: usize,
    pub seed: u64,
    pub workers: usize,
    pub n: Option<usize>,
    pub ci_level: f64,
    pub bootstrap_replicates: usize,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            reps: 1000,
            seed: 1,
            workers: 0,
            n: None,
            ci_level: 0.95,
            bootstrap_replicates: 500,
        }
    }
}

/// One successful estimate from one replication.
#[derive(Debug, Clone)]
pub struct RepRecord {
    pub scenario: String,
    pub n: usize,
    pub rep_index: usize,
    /// Seed the cohort was generated from.
    pub seed: u64,
    pub method: Method,
    pub beta1_hat: f64,
    pub std_err: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// 1 when the true composite effect lies inside the interval.
    pub covered: u8,
    /// Overall correlation between the two outcomes in this cohort.
    pub corr_y1_y2: f64,
    pub true_beta1: f64,
}

/// Per-method aggregate over the successful replications.
#[derive(Debug, Clone)]
pub struct MethodSummary {
    pub method: Method,
    pub successes: usize,
    pub failures: usize,
    pub mean_bias: f64,
    pub empirical_variance: f64,
    /// `Var(unaug) / Var(this method)`; exactly 1 for unaug itself, absent
    /// when unaug was not part of the study.
    pub variance_ratio_vs_unaug: Option<f64>,
    pub coverage: f64,
    pub mean_std_err: f64,
}

#[derive(Debug, Clone)]
pub struct StudySummary {
    pub scenario: String,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub true_beta1: f64,
    pub mean_corr_y1_y2: f64,
    pub methods: Vec<MethodSummary>,
    pub warnings: Vec<String>,
}

#[derive(Debug)]
pub struct StudyOutput {
    pub records: Vec<RepRecord>,
    pub summary: StudySummary,
}

struct RepOutcome {
    rep_index: usize,
    seed: u64,
    corr: f64,
    results: Vec<(Method, Result<(f64, f64, f64, f64), String>)>,
}

/// Runs `options.reps` simulated replications of a scenario and summarizes
/// each method against the enumerated true composite effect. Failed
/// replications are counted per method without aborting the study; a
/// method failing in every replication is an error.
pub fn run_study(
    scenario: &ScenarioConfig,
    methods: &[Method],
    options: &StudyOptions,
) -> Result<StudyOutput, HarnessError> {
    if options.reps < 2 {
        return Err(HarnessError::InvalidArguments(
            "a study needs at least two replications".to_string(),
        ));
    }
    if methods.is_empty() {
        return Err(HarnessError::InvalidArguments(
            "no methods requested".to_string(),
        ));
    }
    let mut config = prepare(scenario)?;
    if let Some(n) = options.n {
        config.n = n;
    }
    config.validate()?;

    let mut warnings = Vec::new();
    if config.design == StudyDesign::Observational {
        for m in methods {
            if matches!(m, Method::Aug | Method::AugW | Method::AugY2W) {
                warnings.push(format!(
                    "method {m} assumes randomized treatment; results on an observational \
                     scenario inherit the confounding bias"
                ));
            }
        }
    }

    let truth = true_beta1_composite(&config)?;
    let analysis = AnalysisOptions {
        strata: Some(default_simulated_strata()),
        regression: Some(default_simulated_regression()),
        ci_level: options.ci_level,
        bootstrap: BootstrapOptions {
            replicates: options.bootstrap_replicates,
            seed: 0, // replaced per replication below
        },
    };

    let run_rep = |rep_index: usize| -> RepOutcome {
        let seed = derive_seed(options.seed, rep_index as u64);
        let cohort = match generate(&config, seed) {
            Ok(c) => c,
            Err(e) => {
                let message = format!("generation failed: {e}");
                return RepOutcome {
                    rep_index,
                    seed,
                    corr: f64::NAN,
                    results: methods.iter().map(|m| (*m, Err(message.clone()))).collect(),
                };
            }
        };
        let corr = report_correlation(&cohort.dataset)
            .map(|c| c.overall)
            .unwrap_or(f64::NAN);
        let rep_analysis = AnalysisOptions {
            bootstrap: BootstrapOptions {
                replicates: analysis.bootstrap.replicates,
                seed: derive_seed(seed, u64::MAX),
            },
            ..analysis.clone()
        };
        let results = methods
            .iter()
            .map(|&method| {
                let outcome = run_method(&cohort.dataset, method, &rep_analysis)
                    .map(|r| (r.beta1_hat, r.std_err, r.ci.0, r.ci.1))
                    .map_err(|e| e.to_string());
                (method, outcome)
            })
            .collect();
        RepOutcome {
            rep_index,
            seed,
            corr,
            results,
        }
    };

    let outcomes: Vec<RepOutcome> = if options.workers == 1 {
        (0..options.reps).map(run_rep).collect()
    } else {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if options.workers > 0 {
            builder = builder.num_threads(options.workers);
        }
        let pool = builder
            .build()
            .map_err(|e| HarnessError::InvalidArguments(format!("thread pool: {e}")))?;
        pool.install(|| (0..options.reps).into_par_iter().map(run_rep).collect())
    };

    summarize(scenario, &config.name, config.n, methods, options, truth, warnings, outcomes)
}

#[allow(clippy::too_many_arguments)]
fn summarize(
    _scenario: &ScenarioConfig,
    name: &str,
    n: usize,
    methods: &[Method],
    options: &StudyOptions,
    truth: f64,
    mut warnings: Vec<String>,
    outcomes: Vec<RepOutcome>,
) -> Result<StudyOutput, HarnessError> {
    let mut records = Vec::new();
    let mut corr_sum = 0.0;
    let mut corr_count = 0usize;
    for outcome in &outcomes {
        if outcome.corr.is_finite() {
            corr_sum += outcome.corr;
            corr_count += 1;
        }
        for (method, result) in &outcome.results {
            if let Ok((beta, se, lo, hi)) = result {
                records.push(RepRecord {
                    scenario: name.to_string(),
                    n,
                    rep_index: outcome.rep_index,
                    seed: outcome.seed,
                    method: *method,
                    beta1_hat: *beta,
                    std_err: *se,
                    ci_lo: *lo,
                    ci_hi: *hi,
                    covered: u8::from(*lo <= truth && truth <= *hi),
                    corr_y1_y2: outcome.corr,
                    true_beta1: truth,
                });
            }
        }
    }

    let per_method = |method: Method| -> (Vec<&RepRecord>, usize) {
        let hits: Vec<&RepRecord> = records.iter().filter(|r| r.method == method).collect();
        let failures = options.reps - hits.len();
        (hits, failures)
    };

    let variance_of = |hits: &[&RepRecord]| -> f64 {
        let m = hits.len() as f64;
        let mean = hits.iter().map(|r| r.beta1_hat).sum::<f64>() / m;
        if hits.len() < 2 {
            return 0.0;
        }
        hits.iter()
            .map(|r| (r.beta1_hat - mean).powi(2))
            .sum::<f64>()
            / (m - 1.0)
    };

    let unaug_variance = if methods.contains(&Method::UnAug) {
        let (hits, _) = per_method(Method::UnAug);
        if hits.is_empty() {
            None
        } else {
            Some(variance_of(&hits))
        }
    } else {
        None
    };

    let mut summaries = Vec::new();
    for &method in methods {
        let (hits, failures) = per_method(method);
        if hits.is_empty() {
            return Err(HarnessError::AllRepsFailed(method));
        }
        let m = hits.len() as f64;
        let mean_bias = hits.iter().map(|r| r.beta1_hat - truth).sum::<f64>() / m;
        let empirical_variance = variance_of(&hits);
        let coverage = hits.iter().map(|r| f64::from(r.covered)).sum::<f64>() / m;
        let mean_std_err = hits.iter().map(|r| r.std_err).sum::<f64>() / m;
        let variance_ratio_vs_unaug = if method == Method::UnAug {
            Some(1.0)
        } else {
            unaug_variance.map(|v| v / empirical_variance)
        };
        if failures > 0 {
            warnings.push(format!("method {method}: {failures} failed replications"));
        }
        summaries.push(MethodSummary {
            method,
            successes: hits.len(),
            failures,
            mean_bias,
            empirical_variance,
            variance_ratio_vs_unaug,
            coverage,
            mean_std_err,
        });
    }

    Ok(StudyOutput {
        records,
        summary: StudySummary {
            scenario: name.to_string(),
            n,
            reps: options.reps,
            seed: options.seed,
            true_beta1: truth,
            mean_corr_y1_y2: if corr_count > 0 {
                corr_sum / corr_count as f64
            } else {
                f64::NAN
            },
            methods: summaries,
            warnings,
        },
    })
}

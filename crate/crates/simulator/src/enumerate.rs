//! Exact enumeration over the finite (site, age, risk, treatment) space.
//!
//! Everything the simulation study needs as ground truth comes from these
//! sums: calibrated marginal incidences, the true composite-endpoint log
//! relative risk (an interventional contrast with treatment forced to each
//! arm), the asymptotic values of the unadjusted and joint estimators, and
//! the population correlation between the two outcomes.

use crate::config::{GeneratorConfig, OutcomeType, AGE_LEVELS, N_SITES, N_W_CELLS};
use crate::error::SimulatorError;

/// One cell of the enumerated covariate/risk space.
pub(crate) struct Cell {
    pub site: usize,
    pub age: f64,
    pub a: f64,
    /// Joint probability P(site, age, a).
    pub weight: f64,
    /// P(T = 1 | cell) under the config's design.
    pub p_t1: f64,
}

pub(crate) fn cells(config: &GeneratorConfig) -> Vec<Cell> {
    let normalizer = config.treatment_normalizer();
    let mut out = Vec::with_capacity(N_W_CELLS * 3);
    for site in 0..N_SITES {
        for (age_idx, &age) in AGE_LEVELS.iter().enumerate() {
            for (level, &a) in config.unmeasured.values.iter().enumerate() {
                let weight = config.unmeasured.prob(site, age_idx, level) / N_W_CELLS as f64;
                let p_t1 = config.treatment_prob(site, age, a, normalizer);
                out.push(Cell {
                    site,
                    age,
                    a,
                    weight,
                    p_t1,
                });
            }
        }
    }
    out
}

/// P(composite primary infection | cell, t): one minus the product of the
/// per-type miss probabilities (types are conditionally independent).
fn composite_prob(config: &GeneratorConfig, cell: &Cell, t: u8) -> f64 {
    let mut miss = 1.0;
    for ty in &config.primary_types {
        miss *= 1.0 - cell.a * ty.rate(cell.site, cell.age, t);
    }
    1.0 - miss
}

/// E(negative-control count | cell, t).
fn secondary_mean(config: &GeneratorConfig, cell: &Cell, t: u8) -> f64 {
    config
        .secondary_types
        .iter()
        .map(|ty| cell.a * ty.rate(cell.site, cell.age, t))
        .sum()
}

/// Marginal P(infection) for one outcome type under the config's design.
pub fn marginal_incidence(config: &GeneratorConfig, ty: &OutcomeType) -> f64 {
    cells(config)
        .iter()
        .map(|c| {
            let p1 = c.a * ty.rate(c.site, c.age, 1);
            let p0 = c.a * ty.rate(c.site, c.age, 0);
            c.weight * (c.p_t1 * p1 + (1.0 - c.p_t1) * p0)
        })
        .sum()
}

/// Marginal expectation of the negative-control count.
pub fn marginal_mean_y2(config: &GeneratorConfig) -> f64 {
    cells(config)
        .iter()
        .map(|c| {
            c.weight
                * (c.p_t1 * secondary_mean(config, c, 1)
                    + (1.0 - c.p_t1) * secondary_mean(config, c, 0))
        })
        .sum()
}

/// Enumerated marginal treatment probability; 0.5 by construction for both
/// designs.
pub fn treatment_marginal(config: &GeneratorConfig) -> f64 {
    cells(config).iter().map(|c| c.weight * c.p_t1).sum()
}

/// True composite-endpoint log relative risk: the interventional contrast
/// `log E[Y1 | do(T=1)] / E[Y1 | do(T=0)]`, enumerated exactly over the
/// covariate/risk space with treatment forced to each arm.
pub fn true_beta1_composite(config: &GeneratorConfig) -> Result<f64, SimulatorError> {
    config.validate()?;
    let mut e1 = 0.0;
    let mut e0 = 0.0;
    for c in cells(config) {
        e1 += c.weight * composite_prob(config, &c, 1);
        e0 += c.weight * composite_prob(config, &c, 0);
    }
    if e0 <= 0.0 || e1 <= 0.0 {
        return Err(SimulatorError::InvalidConfig(
            "composite incidence is zero under a forced arm".to_string(),
        ));
    }
    Ok((e1 / e0).ln())
}

/// Which estimator's asymptotic value to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlimEstimator {
    UnAug,
    JointNc,
}

/// Asymptotic value of the estimator: conditional means given treatment are
/// enumerated via Bayes over the assignment probabilities, so this is the
/// exact probability limit of the corresponding sample ratios.
pub fn plim_oracle(
    config: &GeneratorConfig,
    estimator: PlimEstimator,
) -> Result<f64, SimulatorError> {
    config.validate()?;
    let all = cells(config);
    let p_t1: f64 = all.iter().map(|c| c.weight * c.p_t1).sum();
    let p_t0 = 1.0 - p_t1;

    let mut y1_t1 = 0.0;
    let mut y1_t0 = 0.0;
    let mut y2_t1 = 0.0;
    let mut y2_t0 = 0.0;
    for c in &all {
        let w1 = c.weight * c.p_t1 / p_t1;
        let w0 = c.weight * (1.0 - c.p_t1) / p_t0;
        y1_t1 += w1 * composite_prob(config, c, 1);
        y1_t0 += w0 * composite_prob(config, c, 0);
        y2_t1 += w1 * secondary_mean(config, c, 1);
        y2_t0 += w0 * secondary_mean(config, c, 0);
    }
    if y1_t0 <= 0.0 || y1_t1 <= 0.0 {
        return Err(SimulatorError::InvalidConfig(
            "primary incidence is zero in an arm".to_string(),
        ));
    }
    let unaug = (y1_t1 / y1_t0).ln();
    match estimator {
        PlimEstimator::UnAug => Ok(unaug),
        PlimEstimator::JointNc => {
            if y2_t0 <= 0.0 || y2_t1 <= 0.0 {
                return Err(SimulatorError::InvalidConfig(
                    "negative-control mean is zero in an arm".to_string(),
                ));
            }
            Ok(unaug - (y2_t1 / y2_t0).ln())
        }
    }
}

/// Population Pearson correlation between the composite primary indicator
/// and the negative-control count, enumerated exactly.
pub fn enumerated_correlation(config: &GeneratorConfig) -> Result<f64, SimulatorError> {
    config.validate()?;
    let all = cells(config);

    let mut e_y1 = 0.0;
    let mut e_y2 = 0.0;
    let mut e_y1y2 = 0.0;
    let mut e_y2sq = 0.0;
    for c in &all {
        for (t, pt) in [(1u8, c.p_t1), (0u8, 1.0 - c.p_t1)] {
            let w = c.weight * pt;
            let pc = composite_prob(config, c, t);
            let m2 = secondary_mean(config, c, t);
            // Conditional variance of the count is the sum of per-type
            // Bernoulli variances.
            let v2: f64 = config
                .secondary_types
                .iter()
                .map(|ty| {
                    let p = c.a * ty.rate(c.site, c.age, t);
                    p * (1.0 - p)
                })
                .sum();
            e_y1 += w * pc;
            e_y2 += w * m2;
            // Y1 and Y2 are conditionally independent given (cell, t).
            e_y1y2 += w * pc * m2;
            e_y2sq += w * (v2 + m2 * m2);
        }
    }
    let var_y1 = e_y1 * (1.0 - e_y1);
    let var_y2 = e_y2sq - e_y2 * e_y2;
    if var_y1 <= 0.0 || var_y2 <= 0.0 {
        return Err(SimulatorError::InvalidConfig(
            "an outcome has zero variance".to_string(),
        ));
    }
    Ok((e_y1y2 - e_y1 * e_y2) / (var_y1 * var_y2).sqrt())
}

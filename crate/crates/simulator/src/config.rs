//! Generator configuration: the full data-generating process for a
//! simulated cohort with two observed covariates (site, age), one
//! unobserved infection-risk multiplier, treatment assignment, and
//! per-strain infection models.

use serde::{Deserialize, Serialize};

use crate::error::SimulatorError;

/// Observed covariate space: three sites with probability 1/3 each and
/// thirteen equiprobable ages.
pub const N_SITES: usize = 3;
pub const AGE_LEVELS: [f64; 13] = [
    15.0, 15.5, 16.0, 16.5, 17.0, 17.5, 18.0, 18.5, 19.0, 19.5, 20.0, 20.5, 21.0,
];
pub const N_AGES: usize = AGE_LEVELS.len();
/// Number of (site, age) combinations.
pub const N_W_CELLS: usize = N_SITES * N_AGES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyDesign {
    Randomized,
    Observational,
}

/// Logistic treatment-assignment kernel for observational cohorts. The
/// assignment probability is `0.5 * expit(linear predictor) / D`, where `D`
/// normalizes the expectation over the joint (site, age, risk) law so the
/// marginal treatment probability is exactly one half.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreatmentModel {
    pub intercept: f64,
    pub age_coef: f64,
    pub site_coef: f64,
    /// Coefficient on the unobserved risk multiplier; this is what makes
    /// the cohort confounded.
    pub risk_coef: f64,
}

impl Default for TreatmentModel {
    fn default() -> Self {
        TreatmentModel {
            intercept: 0.0,
            age_coef: 0.0,
            site_coef: 0.0,
            risk_coef: 0.0,
        }
    }
}

fn default_site_effects() -> [f64; 3] {
    [0.0; 3]
}

/// One infection outcome: `P(infection | site, age, risk a, treatment t) =
/// a * exp(intercept + treat_effect * t + age_slope * age + site_effects[site])`.
///
/// Primary (vaccine-targeted) types carry a nonzero `treat_effect`;
/// secondary (non-targeted) types have `treat_effect = 0` except in
/// sensitivity scenarios that deliberately violate the negative-control
/// assumption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeType {
    pub label: String,
    pub intercept: f64,
    #[serde(default)]
    pub treat_effect: f64,
    #[serde(default)]
    pub age_slope: f64,
    #[serde(default = "default_site_effects")]
    pub site_effects: [f64; 3],
}

impl OutcomeType {
    /// `exp` part of the mean, excluding the risk multiplier.
    pub(crate) fn rate(&self, site: usize, age: f64, t: u8) -> f64 {
        (self.intercept
            + self.treat_effect * f64::from(t)
            + self.age_slope * age
            + self.site_effects[site])
            .exp()
    }
}

/// Distribution of the unobserved risk multiplier given (site, age):
/// three support points (low, usually zero; medium; high) with
/// probabilities per covariate cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnmeasuredRisk {
    pub values: [f64; 3],
    /// `probs[site][age index]` is the probability triple for that cell.
    pub probs: [Vec<[f64; 3]>; 3],
}

impl UnmeasuredRisk {
    pub fn prob(&self, site: usize, age_idx: usize, level: usize) -> f64 {
        self.probs[site][age_idx][level]
    }
}

/// The full data-generating process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub name: String,
    pub design: StudyDesign,
    /// Default cohort size; the harness may override per run.
    pub n: usize,
    /// Number of non-targeted outcome types.
    pub n_nt: usize,
    pub unmeasured: UnmeasuredRisk,
    #[serde(default)]
    pub treatment: TreatmentModel,
    pub primary_types: Vec<OutcomeType>,
    pub secondary_types: Vec<OutcomeType>,
}

impl GeneratorConfig {
    /// Checks the structural invariants and the validity bound: every
    /// implied Bernoulli parameter `a * rate` must stay within [0, 1] over
    /// the whole covariate/risk/treatment space, and observational
    /// assignment probabilities must not exceed 1.
    pub fn validate(&self) -> Result<(), SimulatorError> {
        if self.n == 0 {
            return Err(SimulatorError::InvalidConfig(
                "cohort size must be positive".to_string(),
            ));
        }
        if self.primary_types.is_empty() || self.primary_types.len() > 2 {
            return Err(SimulatorError::InvalidConfig(
                "expected one or two primary outcome types".to_string(),
            ));
        }
        if self.secondary_types.len() != self.n_nt {
            return Err(SimulatorError::InvalidConfig(format!(
                "n_nt = {} but {} secondary types are defined",
                self.n_nt,
                self.secondary_types.len()
            )));
        }
        if self.unmeasured.values.iter().any(|v| *v < 0.0) {
            return Err(SimulatorError::InvalidConfig(
                "risk multiplier values must be nonnegative".to_string(),
            ));
        }
        for site in 0..N_SITES {
            let rows = &self.unmeasured.probs[site];
            if rows.len() != N_AGES {
                return Err(SimulatorError::InvalidConfig(format!(
                    "site {site} risk table has {} rows, expected {N_AGES}",
                    rows.len()
                )));
            }
            for (age_idx, row) in rows.iter().enumerate() {
                if row.iter().any(|p| *p < 0.0) {
                    return Err(SimulatorError::InvalidConfig(format!(
                        "negative risk probability at site {site}, age index {age_idx}"
                    )));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(SimulatorError::InvalidConfig(format!(
                        "risk probabilities at site {site}, age index {age_idx} sum to {sum}"
                    )));
                }
            }
        }

        for ty in self.primary_types.iter().chain(&self.secondary_types) {
            let max = self.max_bernoulli_param(ty);
            if max > 1.0 + 1e-12 {
                return Err(SimulatorError::InvalidConfig(format!(
                    "outcome `{}` reaches Bernoulli parameter {max:.6} > 1",
                    ty.label
                )));
            }
        }

        if self.design == StudyDesign::Observational {
            let d = self.treatment_normalizer();
            let max_p = self.max_expit() * 0.5 / d;
            if max_p > 1.0 + 1e-12 {
                return Err(SimulatorError::InvalidConfig(format!(
                    "observational assignment probability reaches {max_p:.6} > 1"
                )));
            }
        }
        Ok(())
    }

    /// Largest `a * rate` over the whole (site, age, risk, treatment) space.
    pub(crate) fn max_bernoulli_param(&self, ty: &OutcomeType) -> f64 {
        let mut max = 0.0f64;
        for site in 0..N_SITES {
            for age in AGE_LEVELS {
                for &a in &self.unmeasured.values {
                    for t in [0u8, 1u8] {
                        max = max.max(a * ty.rate(site, age, t));
                    }
                }
            }
        }
        max
    }

    pub(crate) fn expit_lp(&self, site: usize, age: f64, a: f64) -> f64 {
        let lp = self.treatment.intercept
            + self.treatment.age_coef * age
            + self.treatment.site_coef * site as f64
            + self.treatment.risk_coef * a;
        1.0 / (1.0 + (-lp).exp())
    }

    /// Expectation of the logistic kernel over the joint (site, age, risk)
    /// distribution; the denominator that pins the treatment marginal at 0.5.
    pub(crate) fn treatment_normalizer(&self) -> f64 {
        let mut d = 0.0;
        for site in 0..N_SITES {
            for (age_idx, &age) in AGE_LEVELS.iter().enumerate() {
                for (level, &a) in self.unmeasured.values.iter().enumerate() {
                    let w = self.unmeasured.prob(site, age_idx, level) / N_W_CELLS as f64;
                    d += w * self.expit_lp(site, age, a);
                }
            }
        }
        d
    }

    fn max_expit(&self) -> f64 {
        let mut max = 0.0f64;
        for site in 0..N_SITES {
            for age in AGE_LEVELS {
                for &a in &self.unmeasured.values {
                    max = max.max(self.expit_lp(site, age, a));
                }
            }
        }
        max
    }

    /// Treatment-assignment probability for one (site, age, risk) cell.
    pub(crate) fn treatment_prob(&self, site: usize, age: f64, a: f64, normalizer: f64) -> f64 {
        match self.design {
            StudyDesign::Randomized => 0.5,
            StudyDesign::Observational => 0.5 * self.expit_lp(site, age, a) / normalizer,
        }
    }
}

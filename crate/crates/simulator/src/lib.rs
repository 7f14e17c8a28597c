//! Simulation of confounded vaccine-efficacy cohorts.
//!
//! The data-generating process draws two observed covariates (site, age),
//! an unobserved infection-risk multiplier correlated with both, a
//! treatment indicator (randomized or confounded observational
//! assignment), and Bernoulli infection indicators for each targeted and
//! non-targeted outcome type. Because the covariate/risk space is finite,
//! every population quantity of interest — marginal incidences, the true
//! composite log relative risk, estimator probability limits, outcome
//! correlations — is computed exactly by enumeration rather than by
//! approximation.

mod calibrate;
mod config;
mod enumerate;
mod error;
mod generate;
mod presets;

pub use calibrate::{calibrate_intercepts, CalibrationTargets};
pub use config::{
    GeneratorConfig, OutcomeType, StudyDesign, TreatmentModel, UnmeasuredRisk, AGE_LEVELS,
    N_AGES, N_SITES, N_W_CELLS,
};
pub use enumerate::{
    enumerated_correlation, marginal_incidence, marginal_mean_y2, plim_oracle,
    treatment_marginal, true_beta1_composite, PlimEstimator,
};
pub use error::SimulatorError;
pub use generate::{generate, GeneratedCohort};
pub use presets::{
    load_preset, load_scenario_file, prepare, preset_names, scenario_from_str, ScenarioConfig,
};

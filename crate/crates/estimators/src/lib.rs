//! Treatment-effect estimators that exploit negative-control outcomes:
//! outcomes recorded alongside the primary endpoint but known to be
//! unaffected by treatment (for vaccine studies, infections by
//! non-targeted strains).
//!
//! Two families are provided. For randomized trials, the augmented
//! estimators add a mean-zero function of the auxiliary data to the
//! two-arm score to shed variance without introducing bias. For
//! observational cohorts, the joint estimators fit the apparent treatment
//! effect on both outcomes and report the difference, canceling
//! confounding that acts proportionally on both; stratified (MH-type) and
//! regression variants additionally adjust for measured covariates.
//!
//! All estimators return an [`EstimateResult`] with a Wald interval on the
//! log relative-risk scale and the implied vaccine efficacy.

mod arm_means;
mod aug;
mod bootstrap;
mod correlation;
mod error;
mod joint_mh;
mod joint_nc;
mod joint_reg;
mod mh;
mod regression;
mod ss_joint;
mod systems;
mod unaug;

pub use arm_means::{fit_arm_means, ArmConditionalMeanModel, Augmentation};
pub use aug::estimate_aug;
pub use bootstrap::BootstrapOptions;
pub use correlation::{report_correlation, CorrelationReport};
pub use error::EstimatorError;
pub use joint_mh::{estimate_joint_mh, estimate_joint_mh_with};
pub use joint_nc::estimate_joint_nc;
pub use joint_reg::estimate_joint_reg;
pub use mh::{estimate_mh, estimate_mh_with};
pub use regression::{Design, RegressionSpec, Term, Transform};
pub use ss_joint::{estimate_ss_joint, pool_inverse_variance};
pub use systems::{
    AugmentedTwoArmSystem, JointNcSystem, LogBinomialRegSystem, LogMeanRegSystem,
    TwoArmLogRiskSystem,
};
pub use unaug::estimate_unaug;

// Re-exported so downstream callers and tests can cite one estimate type.
pub use nco_core::{EstimateResult, Method};

use std::fmt;
use std::str::FromStr;

use crate::stats::normal_quantile;

/// Estimation method tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    UnAug,
    Aug,
    AugW,
    AugY2W,
    Mh,
    JointNc,
    SsJoint,
    JointMh,
    JointReg,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::UnAug,
        Method::Aug,
        Method::AugW,
        Method::AugY2W,
        Method::Mh,
        Method::JointNc,
        Method::SsJoint,
        Method::JointMh,
        Method::JointReg,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::UnAug => "unaug",
            Method::Aug => "aug",
            Method::AugW => "aug_w",
            Method::AugY2W => "aug_y2w",
            Method::Mh => "mh",
            Method::JointNc => "joint_nc",
            Method::SsJoint => "ss_joint",
            Method::JointMh => "joint_mh",
            Method::JointReg => "joint_reg",
        }
    }

    /// True for methods that report `(beta1_star, beta2_star)` components.
    pub fn is_joint(&self) -> bool {
        matches!(
            self,
            Method::JointNc | Method::SsJoint | Method::JointMh | Method::JointReg
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown method tag `{s}`"))
    }
}

/// Solver and data-quality notes attached to an estimate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub solver_iterations: usize,
    pub excluded_strata: Vec<String>,
    pub warnings: Vec<String>,
}

/// A log relative-risk estimate with its Wald confidence interval and
/// derived vaccine efficacy.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub method: Method,
    /// Estimated log relative risk.
    pub beta1_hat: f64,
    pub std_err: f64,
    pub ci_level: f64,
    /// Wald interval on the log relative-risk scale.
    pub ci: (f64, f64),
    /// Vaccine efficacy, `1 - exp(beta1_hat)`.
    pub ve: f64,
    /// `(beta1_star, beta2_star)` for joint methods, with
    /// `beta1_hat = beta1_star - beta2_star`.
    pub components: Option<(f64, f64)>,
    pub diagnostics: Diagnostics,
}

impl EstimateResult {
    /// Builds a result from an estimate and standard error, deriving the
    /// Wald interval `beta1_hat ∓ z_{(1+level)/2} * std_err` and the
    /// vaccine efficacy.
    pub fn from_estimate(
        method: Method,
        beta1_hat: f64,
        std_err: f64,
        ci_level: f64,
        components: Option<(f64, f64)>,
        diagnostics: Diagnostics,
    ) -> Self {
        assert!(
            ci_level > 0.0 && ci_level < 1.0,
            "confidence level must be in (0,1)"
        );
        let z = normal_quantile((1.0 + ci_level) / 2.0);
        EstimateResult {
            method,
            beta1_hat,
            std_err,
            ci_level,
            ci: (beta1_hat - z * std_err, beta1_hat + z * std_err),
            ve: 1.0 - beta1_hat.exp(),
            components,
            diagnostics,
        }
    }
}

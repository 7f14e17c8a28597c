//! The estimating systems behind each model-based estimator. Every system
//! here ships with an analytic Jacobian; tests check those against finite
//! differences.

use nco_mestimation::EstimatingSystem;

use nco_core::SubjectRecord;

use crate::arm_means::ArmConditionalMeanModel;
use crate::regression::Design;

/// Log-link binary means must stay strictly below 1.
pub(crate) const BINARY_MEAN_CAP: f64 = 1.0 - 1e-10;
/// Floor for log-link binary means. Without a floor, a zero-event arm lets
/// Newton push the implied mean toward zero until the score dips under the
/// convergence tolerance, silently reporting an effectively infinite log
/// relative risk; with it, the run ends in NonConvergence instead.
pub(crate) const BINARY_MEAN_FLOOR: f64 = 1e-8;
/// Linear predictors beyond this would overflow `exp`.
pub(crate) const LINPRED_CAP: f64 = 700.0;

pub(crate) fn binary_mean_ok(p: f64) -> bool {
    p > BINARY_MEAN_FLOOR && p < BINARY_MEAN_CAP
}

/// Saturated two-arm log-risk score: theta = (log control mean,
/// log relative risk), per-subject mean `p = exp(theta0 + theta1 * t)`.
///
/// Score rows: `(y - p)/(1 - p)` and `t (y - p)/(1 - p)`.
pub struct TwoArmLogRiskSystem;

impl EstimatingSystem for TwoArmLogRiskSystem {
    fn dim_theta(&self) -> usize {
        2
    }

    fn score(&self, record: &SubjectRecord, theta: &[f64], out: &mut [f64]) {
        let t = f64::from(record.t);
        let y = f64::from(record.y1);
        let p = (theta[0] + theta[1] * t).exp();
        let u = (y - p) / (1.0 - p);
        out[0] = u;
        out[1] = t * u;
    }

    fn jacobian(&self, record: &SubjectRecord, theta: &[f64], out: &mut [f64]) {
        let t = f64::from(record.t);
        let y = f64::from(record.y1);
        let p = (theta[0] + theta[1] * t).exp();
        let g = p * (y - 1.0) / ((1.0 - p) * (1.0 - p));
        out[0] = g;
        out[1] = g * t;
        out[2] = g * t;
        out[3] = g * t;
    }

    fn admissible(&self, _record: &SubjectRecord, theta: &[f64]) -> bool {
        // Both arm means must lie in (0, 1); records only ever see one of
        // the two linear predictors, so bound them jointly.
        theta.iter().all(|x| x.is_finite())
            && binary_mean_ok(theta[0].exp())
            && binary_mean_ok((theta[0] + theta[1]).exp())
    }
}

/// The augmented two-arm score: the saturated score minus
/// `(I(T=t) - pi_t) * E{U1 | aux, T=t}` for both arms, with the
/// conditional means supplied by plug-in models and treated as fixed.
pub struct AugmentedTwoArmSystem {
    pub pi1_hat: f64,
    pub treated_mean: ArmConditionalMeanModel,
    pub control_mean: ArmConditionalMeanModel,
}

impl EstimatingSystem for AugmentedTwoArmSystem {
    fn dim_theta(&self) -> usize {
        2
    }

    fn score(&self, record: &SubjectRecord, theta: &[f64], out: &mut [f64]) {
        let t = f64::from(record.t);
        let y = f64::from(record.y1);
        let p_own = (theta[0] + theta[1] * t).exp();
        let p1 = (theta[0] + theta[1]).exp();
        let p0 = theta[0].exp();
        let u = (y - p_own) / (1.0 - p_own);
        let c = t - self.pi1_hat;
        let m1 = self.treated_mean.predict(record);
        let m0 = self.control_mean.predict(record);
        let a1 = (m1 - p1) / (1.0 - p1);
        let a0 = (m0 - p0) / (1.0 - p0);
        out[0] = u - c * a1 + c * a0;
        out[1] = t * u - c * a1;
    }

    fn jacobian(&self, record: &SubjectRecord, theta: &[f64], out: &mut [f64]) {
        let t = f64::from(record.t);
        let y = f64::from(record.y1);
        let p_own = (theta[0] + theta[1] * t).exp();
        let p1 = (theta[0] + theta[1]).exp();
        let p0 = theta[0].exp();
        let c = t - self.pi1_hat;
        let m1 = self.treated_mean.predict(record);
        let m0 = self.control_mean.predict(record);

        let g = p_own * (y - 1.0) / ((1.0 - p_own) * (1.0 - p_own));
        // d a1 / d theta = (m1 - 1) p1 / (1 - p1)^2 * (1, 1)
        let d1 = (m1 - 1.0) * p1 / ((1.0 - p1) * (1.0 - p1));
        // d a0 / d theta = (m0 - 1) p0 / (1 - p0)^2 * (1, 0)
        let d0 = (m0 - 1.0) * p0 / ((1.0 - p0) * (1.0 - p0));

        out[0] = g - c * d1 + c * d0;
        out[1] = g * t - c * d1;
        out[2] = g * t - c * d1;
        out[3] = g * t - c * d1;
    }

    fn admissible(&self, record: &SubjectRecord, theta: &[f64]) -> bool {
        TwoArmLogRiskSystem.admissible(record, theta)
    }
}

/// Joint no-covariate system for (primary outcome, negative-control count):
/// theta = (mu1, b1, mu2, b2), score rows
/// `(y1-p1)/(1-p1)`, `t (y1-p1)/(1-p1)`, `y2-p2`, `t (y2-p2)` with
/// `p1 = exp(mu1 + b1 t)` and `p2 = exp(mu2 + b2 t)`.
pub struct JointNcSystem;

impl EstimatingSystem for JointNcSystem {
    fn dim_theta(&self) -> usize {
        4
    }

    fn score(&self, record: &SubjectRecord, theta: &[f64], out: &mut [f64]) {
        let t = f64::from(record.t);
        let y1 = f64::from(record.y1);
        let y2 = f64::from(record.y2);
        let p1 = (theta[0] + theta[1] * t).exp();
        let p2 = (theta[2] + theta[3] * t).exp();
        let u = (y1 - p1) / (1.0 - p1);
        out[0] = u;
        out[1] = t * u;
        out[2] = y2 - p2;
        out[3] = t * (y2 - p2);
    }

    fn jacobian(&self, record: &SubjectRecord, theta: &[f64], out: &mut [f64]) {
        let t = f64::from(record.t);
        let y1 = f64::from(record.y1);
        let p1 = (theta[0] + theta[1] * t).exp();
        let p2 = (theta[2] + theta[3] * t).exp();
        let g = p1 * (y1 - 1.0) / ((1.0 - p1) * (1.0 - p1));
        out.fill(0.0);
        out[0] = g;
        out[1] = g * t;
        out[4] = g * t;
        out[5] = g * t;
        out[10] = -p2;
        out[11] = -p2 * t;
        out[14] = -p2 * t;
        out[15] = -p2 * t;
    }

    fn admissible(&self, _record: &SubjectRecord, theta: &[f64]) -> bool {
        theta.iter().all(|x| x.is_finite())
            && binary_mean_ok(theta[0].exp())
            && binary_mean_ok((theta[0] + theta[1]).exp())
            && theta[2].abs() < LINPRED_CAP
            && (theta[2] + theta[3]).abs() < LINPRED_CAP
    }
}

/// Log-binomial regression score for the primary outcome:
/// `(y1 - p)/(1 - p) * x` with `p = exp(xᵀ theta)`.
pub struct LogBinomialRegSystem {
    pub design: Design,
}

impl EstimatingSystem for LogBinomialRegSystem {
    fn dim_theta(&self) -> usize {
        self.design.p()
    }

    fn score(&self, record: &SubjectRecord, theta: &[f64], out: &mut [f64]) {
        let p_dim = self.design.p();
        let mut x = vec![0.0; p_dim];
        self.design.fill_row(record, &mut x);
        let lp: f64 = x.iter().zip(theta).map(|(a, b)| a * b).sum();
        let p = lp.exp();
        let y = f64::from(record.y1);
        let u = (y - p) / (1.0 - p);
        for (o, xi) in out.iter_mut().zip(&x) {
            *o = u * xi;
        }
    }

    fn jacobian(&self, record: &SubjectRecord, theta: &[f64], out: &mut [f64]) {
        let p_dim = self.design.p();
        let mut x = vec![0.0; p_dim];
        self.design.fill_row(record, &mut x);
        let lp: f64 = x.iter().zip(theta).map(|(a, b)| a * b).sum();
        let p = lp.exp();
        let y = f64::from(record.y1);
        let g = p * (y - 1.0) / ((1.0 - p) * (1.0 - p));
        for i in 0..p_dim {
            for j in 0..p_dim {
                out[i * p_dim + j] = g * x[i] * x[j];
            }
        }
    }

    fn admissible(&self, record: &SubjectRecord, theta: &[f64]) -> bool {
        let mut x = vec![0.0; self.design.p()];
        self.design.fill_row(record, &mut x);
        let lp: f64 = x.iter().zip(theta).map(|(a, b)| a * b).sum();
        lp.is_finite() && binary_mean_ok(lp.exp())
    }
}

/// Mean-residual regression score for the negative-control count:
/// `(y2 - p) * x` with `p = exp(xᵀ theta)`.
pub struct LogMeanRegSystem {
    pub design: Design,
}

impl EstimatingSystem for LogMeanRegSystem {
    fn dim_theta(&self) -> usize {
        self.design.p()
    }

    fn score(&self, record: &SubjectRecord, theta: &[f64], out: &mut [f64]) {
        let p_dim = self.design.p();
        let mut x = vec![0.0; p_dim];
        self.design.fill_row(record, &mut x);
        let lp: f64 = x.iter().zip(theta).map(|(a, b)| a * b).sum();
        let p = lp.exp();
        let y = f64::from(record.y2);
        for (o, xi) in out.iter_mut().zip(&x) {
            *o = (y - p) * xi;
        }
    }

    fn jacobian(&self, record: &SubjectRecord, theta: &[f64], out: &mut [f64]) {
        let p_dim = self.design.p();
        let mut x = vec![0.0; p_dim];
        self.design.fill_row(record, &mut x);
        let lp: f64 = x.iter().zip(theta).map(|(a, b)| a * b).sum();
        let p = lp.exp();
        for i in 0..p_dim {
            for j in 0..p_dim {
                out[i * p_dim + j] = -p * x[i] * x[j];
            }
        }
    }

    fn admissible(&self, record: &SubjectRecord, theta: &[f64]) -> bool {
        let mut x = vec![0.0; self.design.p()];
        self.design.fill_row(record, &mut x);
        let lp: f64 = x.iter().zip(theta).map(|(a, b)| a * b).sum();
        lp.is_finite() && lp.abs() < LINPRED_CAP
    }
}

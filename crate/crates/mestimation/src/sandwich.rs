use nalgebra::DMatrix;
use nco_core::Dataset;

use crate::error::MEstimationError;
use crate::system::EstimatingSystem;

/// Empirical sandwich covariance `A^-1 B A^-T / n` of the estimating
/// equation root, with `A = -sum(jacobian)/n` and `B = sum(score scoreᵀ)/n`
/// evaluated at `theta_hat`. The result is symmetrized to remove
/// accumulation noise.
pub fn sandwich_covariance(
    system: &dyn EstimatingSystem,
    data: &Dataset,
    theta_hat: &[f64],
) -> Result<DMatrix<f64>, MEstimationError> {
    let p = system.dim_theta();
    if theta_hat.len() != p {
        return Err(MEstimationError::DimensionMismatch {
            expected: p,
            got: theta_hat.len(),
        });
    }
    let n = data.n() as f64;

    let mut bread = DMatrix::<f64>::zeros(p, p);
    let mut meat = DMatrix::<f64>::zeros(p, p);
    let mut score_buf = vec![0.0; p];
    let mut jac_buf = vec![0.0; p * p];
    for rec in data.records() {
        system.score(rec, theta_hat, &mut score_buf);
        system.jacobian(rec, theta_hat, &mut jac_buf);
        for i in 0..p {
            for j in 0..p {
                bread[(i, j)] -= jac_buf[i * p + j] / n;
                meat[(i, j)] += score_buf[i] * score_buf[j] / n;
            }
        }
    }

    let bread_inv = bread
        .clone()
        .lu()
        .try_inverse()
        .ok_or(MEstimationError::SingularBread)?;
    if bread_inv.iter().any(|x| !x.is_finite()) {
        return Err(MEstimationError::SingularBread);
    }

    let cov = &bread_inv * meat * bread_inv.transpose() / n;
    // Symmetrize.
    let cov = (&cov + cov.transpose()) * 0.5;
    Ok(cov)
}

/// Variance of the linear contrast `cᵀ theta_hat` under covariance `cov`.
///
/// With `c = (0, 1, 0, -1)` on a stacked two-block system this is
/// `Var(b1) + Var(b2) - 2 Cov(b1, b2)`, the variance of a difference of
/// block estimates.
pub fn contrast_variance(cov: &DMatrix<f64>, c: &[f64]) -> Result<f64, MEstimationError> {
    if cov.nrows() != c.len() || cov.ncols() != c.len() {
        return Err(MEstimationError::DimensionMismatch {
            expected: cov.nrows(),
            got: c.len(),
        });
    }
    let mut acc = 0.0;
    for i in 0..c.len() {
        for j in 0..c.len() {
            acc += c[i] * cov[(i, j)] * c[j];
        }
    }
    Ok(acc)
}

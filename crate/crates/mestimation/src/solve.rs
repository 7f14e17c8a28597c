use nalgebra::{DMatrix, DVector};
use nco_core::Dataset;

use crate::error::MEstimationError;
use crate::system::{total_score, EstimatingSystem};

/// Solver controls. The defaults match the library-wide contract:
/// total-score max-norm below `max(1e-10 * n, 1e-8)`, at most 100 Newton
/// iterations, and at most 30 step halvings per iteration.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub score_tol_rel: f64,
    pub score_tol_abs: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            score_tol_rel: 1e-10,
            score_tol_abs: 1e-8,
            max_iterations: 100,
            max_halvings: 30,
        }
    }
}

impl SolveOptions {
    /// Convergence tolerance for a dataset of `n` records: whichever of
    /// the relative and absolute bounds is looser.
    pub fn tolerance(&self, n: usize) -> f64 {
        (self.score_tol_rel * n as f64).max(self.score_tol_abs)
    }
}

/// Outcome of a Newton solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub theta_hat: Vec<f64>,
    /// Accepted Newton steps.
    pub iterations: usize,
    /// Max-norm of the summed score at `theta_hat`.
    pub final_score_norm: f64,
    pub converged: bool,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn admissible_for_all(system: &dyn EstimatingSystem, data: &Dataset, theta: &[f64]) -> bool {
    data.records().iter().all(|r| system.admissible(r, theta))
}

/// Newton's method with step halving on the summed estimating equation.
///
/// Steps that fail to reduce the score norm or that leave the admissible
/// region are halved, up to `max_halvings` times; a step that cannot be
/// salvaged aborts with `NonConvergence` carrying the best point reached.
pub fn solve(
    system: &dyn EstimatingSystem,
    data: &Dataset,
    init: &[f64],
    options: &SolveOptions,
) -> Result<SolveReport, MEstimationError> {
    let p = system.dim_theta();
    if init.len() != p {
        return Err(MEstimationError::DimensionMismatch {
            expected: p,
            got: init.len(),
        });
    }
    if !admissible_for_all(system, data, init) {
        return Err(MEstimationError::InadmissibleInit);
    }

    let tol = options.tolerance(data.n());
    let mut theta = init.to_vec();
    let mut score = total_score(system, data, &theta);
    let mut norm = max_norm(&score);
    if !norm.is_finite() {
        return Err(MEstimationError::InadmissibleInit);
    }

    let mut jac_buf = vec![0.0; p * p];
    for iteration in 0..options.max_iterations {
        if norm <= tol {
            return Ok(SolveReport {
                theta_hat: theta,
                iterations: iteration,
                final_score_norm: norm,
                converged: true,
            });
        }

        let mut total_jac = DMatrix::<f64>::zeros(p, p);
        for rec in data.records() {
            system.jacobian(rec, &theta, &mut jac_buf);
            for i in 0..p {
                for j in 0..p {
                    total_jac[(i, j)] += jac_buf[i * p + j];
                }
            }
        }

        let rhs = DVector::from_column_slice(&score);
        let step = total_jac
            .lu()
            .solve(&(-rhs))
            .ok_or(MEstimationError::SingularJacobian)?;
        if step.iter().any(|x| !x.is_finite()) {
            return Err(MEstimationError::SingularJacobian);
        }

        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=options.max_halvings {
            let candidate: Vec<f64> = theta
                .iter()
                .zip(step.iter())
                .map(|(t, s)| t + lambda * s)
                .collect();
            if admissible_for_all(system, data, &candidate) {
                let cand_score = total_score(system, data, &candidate);
                let cand_norm = max_norm(&cand_score);
                if cand_norm.is_finite() && cand_norm < norm {
                    theta = candidate;
                    score = cand_score;
                    norm = cand_norm;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(MEstimationError::NonConvergence(SolveReport {
                theta_hat: theta,
                iterations: iteration,
                final_score_norm: norm,
                converged: false,
            }));
        }
    }

    if norm <= tol {
        return Ok(SolveReport {
            theta_hat: theta,
            iterations: options.max_iterations,
            final_score_norm: norm,
            converged: true,
        });
    }
    Err(MEstimationError::NonConvergence(SolveReport {
        theta_hat: theta,
        iterations: options.max_iterations,
        final_score_norm: norm,
        converged: false,
    }))
}

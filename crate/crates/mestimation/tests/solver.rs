use std::collections::BTreeMap;

use approx::assert_abs_diff_eq;
use nco_core::{Dataset, SubjectRecord};
use nco_mestimation::{
    contrast_variance, fd_jacobian, par_total_score, sandwich_covariance, solve, total_score,
    EstimatingSystem, SolveOptions, StackedSystem,
};

fn subject(id: usize, t: u8, y1: u8, y2: u32) -> SubjectRecord {
    SubjectRecord {
        id: id.to_string(),
        t,
        y1,
        y2,
        covariates: BTreeMap::new(),
    }
}

fn dataset(rows: &[(u8, u8, u32)]) -> Dataset {
    let records = rows
        .iter()
        .enumerate()
        .map(|(i, &(t, y1, y2))| subject(i, t, y1, y2))
        .collect();
    Dataset::new(records, BTreeMap::new()).unwrap()
}

/// p = 1 mean estimator: score(y, theta) = y - theta, over the y2 count.
struct MeanOfY2;

impl EstimatingSystem for MeanOfY2 {
    fn dim_theta(&self) -> usize {
        1
    }
    fn score(&self, record: &SubjectRecord, theta: &[f64], out: &mut [f64]) {
        out[0] = f64::from(record.y2) - theta[0];
    }
    fn jacobian(&self, _record: &SubjectRecord, _theta: &[f64], out: &mut [f64]) {
        out[0] = -1.0;
    }
}

/// Same shape over y1, to exercise stacking.
struct MeanOfY1;

impl EstimatingSystem for MeanOfY1 {
    fn dim_theta(&self) -> usize {
        1
    }
    fn score(&self, record: &SubjectRecord, theta: &[f64], out: &mut [f64]) {
        out[0] = f64::from(record.y1) - theta[0];
    }
    fn jacobian(&self, _record: &SubjectRecord, _theta: &[f64], out: &mut [f64]) {
        out[0] = -1.0;
    }
}

/// Nonlinear two-parameter system: score = (y2 - exp(a + b t)) * (1, t).
struct ExpMeanByArm;

impl EstimatingSystem for ExpMeanByArm {
    fn dim_theta(&self) -> usize {
        2
    }
    fn score(&self, record: &SubjectRecord, theta: &[f64], out: &mut [f64]) {
        let t = f64::from(record.t);
        let mu = (theta[0] + theta[1] * t).exp();
        let r = f64::from(record.y2) - mu;
        out[0] = r;
        out[1] = t * r;
    }
    fn jacobian(&self, record: &SubjectRecord, theta: &[f64], out: &mut [f64]) {
        let t = f64::from(record.t);
        let mu = (theta[0] + theta[1] * t).exp();
        out[0] = -mu;
        out[1] = -mu * t;
        out[2] = -mu * t;
        out[3] = -mu * t;
    }
}

fn fixture() -> Dataset {
    dataset(&[
        (1, 1, 2),
        (1, 0, 1),
        (1, 0, 3),
        (1, 1, 0),
        (0, 1, 1),
        (0, 1, 4),
        (0, 0, 2),
        (0, 0, 1),
    ])
}

#[test]
fn zero_score_init_converges_in_zero_steps() {
    let data = fixture();
    let mean = data
        .records()
        .iter()
        .map(|r| f64::from(r.y2))
        .sum::<f64>()
        / data.n() as f64;
    let report = solve(&MeanOfY2, &data, &[mean], &SolveOptions::default()).unwrap();
    assert!(report.converged);
    assert_eq!(report.iterations, 0);
    assert_abs_diff_eq!(report.theta_hat[0], mean, epsilon = 1e-15);
}

#[test]
fn linear_system_converges_in_one_step() {
    let data = fixture();
    let report = solve(&MeanOfY2, &data, &[0.0], &SolveOptions::default()).unwrap();
    assert!(report.converged);
    assert_eq!(report.iterations, 1);
}

#[test]
fn sandwich_of_mean_is_sample_variance_over_n() {
    let data = fixture();
    let n = data.n() as f64;
    let ys: Vec<f64> = data.records().iter().map(|r| f64::from(r.y2)).collect();
    let mean = ys.iter().sum::<f64>() / n;
    let var_n = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;

    let report = solve(&MeanOfY2, &data, &[0.0], &SolveOptions::default()).unwrap();
    let cov = sandwich_covariance(&MeanOfY2, &data, &report.theta_hat).unwrap();
    assert_abs_diff_eq!(cov[(0, 0)], var_n / n, epsilon = 1e-12);
}

#[test]
fn duplicating_the_dataset_halves_the_covariance() {
    let data = fixture();
    let mut doubled_rows: Vec<(u8, u8, u32)> = Vec::new();
    for rec in data.records().iter().chain(data.records()) {
        doubled_rows.push((rec.t, rec.y1, rec.y2));
    }
    let doubled = dataset(&doubled_rows);

    let theta = solve(&MeanOfY2, &data, &[0.0], &SolveOptions::default())
        .unwrap()
        .theta_hat;
    let cov1 = sandwich_covariance(&MeanOfY2, &data, &theta).unwrap();
    let cov2 = sandwich_covariance(&MeanOfY2, &doubled, &theta).unwrap();
    assert_abs_diff_eq!(cov2[(0, 0)], cov1[(0, 0)] / 2.0, epsilon = 1e-14);
}

#[test]
fn nonlinear_solve_recovers_arm_means_on_log_scale() {
    let data = fixture();
    let report = solve(&ExpMeanByArm, &data, &[0.0, 0.0], &SolveOptions::default()).unwrap();
    assert!(report.converged);
    // exp(theta0) = control mean of y2 = 2.0; exp(theta0 + theta1) = treated mean = 1.5.
    assert_abs_diff_eq!(report.theta_hat[0].exp(), 2.0, epsilon = 1e-9);
    assert_abs_diff_eq!(
        (report.theta_hat[0] + report.theta_hat[1]).exp(),
        1.5,
        epsilon = 1e-9
    );
}

#[test]
fn analytic_jacobian_matches_finite_differences() {
    let data = fixture();
    for theta in [[0.3, -0.2], [0.0, 0.5], [-1.0, 0.1]] {
        for rec in data.records() {
            let mut analytic = vec![0.0; 4];
            ExpMeanByArm.jacobian(rec, &theta, &mut analytic);
            let fd = fd_jacobian(&ExpMeanByArm, rec, &theta);
            for (a, f) in analytic.iter().zip(&fd) {
                let scale = a.abs().max(1.0);
                assert!(
                    (a - f).abs() / scale < 1e-5,
                    "jacobian mismatch: {a} vs {f}"
                );
            }
        }
    }
}

#[test]
fn solver_is_permutation_invariant() {
    let data = fixture();
    let mut rows: Vec<(u8, u8, u32)> = data
        .records()
        .iter()
        .map(|r| (r.t, r.y1, r.y2))
        .collect();
    rows.reverse();
    rows.swap(0, 3);
    let permuted = dataset(&rows);

    let a = solve(&ExpMeanByArm, &data, &[0.0, 0.0], &SolveOptions::default()).unwrap();
    let b = solve(
        &ExpMeanByArm,
        &permuted,
        &[0.0, 0.0],
        &SolveOptions::default(),
    )
    .unwrap();
    for (x, y) in a.theta_hat.iter().zip(&b.theta_hat) {
        assert_abs_diff_eq!(x, y, epsilon = 1e-12);
    }
}

#[test]
fn parallel_and_serial_accumulation_agree() {
    let rows: Vec<(u8, u8, u32)> = (0..500)
        .map(|i| ((i % 2) as u8, ((i / 3) % 2) as u8, (i % 5) as u32))
        .collect();
    let data = dataset(&rows);
    let theta = [0.2, -0.1];
    let serial = total_score(&ExpMeanByArm, &data, &theta);
    let parallel = par_total_score(&ExpMeanByArm, &data, &theta);
    for (s, p) in serial.iter().zip(&parallel) {
        let scale = s.abs().max(1.0);
        assert!((s - p).abs() / scale < 1e-10);
    }
}

#[test]
fn stacked_system_captures_cross_block_covariance() {
    let data = fixture();
    let n = data.n() as f64;
    let stacked = StackedSystem::new(vec![&MeanOfY1, &MeanOfY2]);
    let m1 = data
        .records()
        .iter()
        .map(|r| f64::from(r.y1))
        .sum::<f64>()
        / n;
    let m2 = data
        .records()
        .iter()
        .map(|r| f64::from(r.y2))
        .sum::<f64>()
        / n;
    let cov = sandwich_covariance(&stacked, &data, &[m1, m2]).unwrap();

    let emp_cov = data
        .records()
        .iter()
        .map(|r| (f64::from(r.y1) - m1) * (f64::from(r.y2) - m2))
        .sum::<f64>()
        / n;
    assert_abs_diff_eq!(cov[(0, 1)], emp_cov / n, epsilon = 1e-12);

    // Variance of the difference of the two block means.
    let v = contrast_variance(&cov, &[1.0, -1.0]).unwrap();
    assert_abs_diff_eq!(
        v,
        cov[(0, 0)] + cov[(1, 1)] - 2.0 * cov[(0, 1)],
        epsilon = 1e-15
    );
}

#[test]
fn inadmissible_init_is_rejected() {
    struct Bounded;
    impl EstimatingSystem for Bounded {
        fn dim_theta(&self) -> usize {
            1
        }
        fn score(&self, record: &SubjectRecord, theta: &[f64], out: &mut [f64]) {
            out[0] = f64::from(record.y1) - theta[0].exp();
        }
        fn jacobian(&self, _record: &SubjectRecord, theta: &[f64], out: &mut [f64]) {
            out[0] = -theta[0].exp();
        }
        fn admissible(&self, _record: &SubjectRecord, theta: &[f64]) -> bool {
            theta[0].exp() < 1.0
        }
    }
    let data = fixture();
    let err = solve(&Bounded, &data, &[0.5], &SolveOptions::default()).unwrap_err();
    assert!(matches!(
        err,
        nco_mestimation::MEstimationError::InadmissibleInit
    ));
}

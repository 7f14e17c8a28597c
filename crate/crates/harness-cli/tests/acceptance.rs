//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line (run with `--nocapture` to see them as they complete).
//!
//! Exact fixtures and reduction identities run in well under a second;
//! the oracle-consistency run and the Monte Carlo studies take a few
//! minutes combined at desk scale (n = 5000, 1000 replications).
//! Everything is seed-fixed, so outcomes are reproducible bit for bit.

use std::collections::BTreeMap;

use nco_core::{derive_seed, Dataset, Method, StratumSpec, SubjectRecord};
use nco_estimators::{
    estimate_aug, estimate_joint_mh, estimate_joint_nc, estimate_joint_reg, estimate_mh,
    estimate_ss_joint, estimate_unaug, pool_inverse_variance, Augmentation,
    AugmentedTwoArmSystem, Design, JointNcSystem, LogBinomialRegSystem, LogMeanRegSystem,
    RegressionSpec, Term, TwoArmLogRiskSystem,
};
use nco_estimators::fit_arm_means;
use nco_harness::{run_study, StudyOptions};
use nco_mestimation::{fd_jacobian, EstimatingSystem};
use nco_simulator::{generate, load_preset, plim_oracle, prepare, PlimEstimator};
use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64;

struct Criterion {
    number: usize,
    description: &'static str,
    failures: Vec<String>,
}

impl Criterion {
    fn new(number: usize, description: &'static str) -> Self {
        Criterion {
            number,
            description,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, what: &str, ok: bool) {
        if !ok {
            self.failures.push(what.to_string());
        }
    }

    fn check_close(&mut self, what: &str, got: f64, expected: f64, tol: f64) {
        if !((got - expected).abs() <= tol) {
            self.failures
                .push(format!("{what}: got {got:.12}, expected {expected:.12} ± {tol:.0e}"));
        }
    }

    fn finish(self) {
        let status = if self.failures.is_empty() {
            "PASS"
        } else {
            "FAIL"
        };
        println!(
            "acceptance criterion {} [{}]: {}",
            self.number, status, self.description
        );
        for f in &self.failures {
            println!("    {f}");
        }
        assert!(
            self.failures.is_empty(),
            "criterion {} failed:\n{}",
            self.number,
            self.failures.join("\n")
        );
    }
}

fn subject(id: usize, t: u8, y1: u8, y2: u32) -> SubjectRecord {
    SubjectRecord {
        id: id.to_string(),
        t,
        y1,
        y2,
        covariates: BTreeMap::new(),
    }
}

fn subject_at(id: usize, t: u8, y1: u8, y2: u32, site: &str) -> SubjectRecord {
    let mut covariates = BTreeMap::new();
    covariates.insert(
        "site".to_string(),
        nco_core::CovariateValue::Categorical(site.to_string()),
    );
    SubjectRecord {
        id: id.to_string(),
        t,
        y1,
        y2,
        covariates,
    }
}

fn plain(rows: Vec<SubjectRecord>) -> Dataset {
    Dataset::new(rows, BTreeMap::new()).unwrap()
}

fn with_site(rows: Vec<SubjectRecord>) -> Dataset {
    let mut schema = BTreeMap::new();
    schema.insert("site".to_string(), nco_core::CovariateKind::Categorical);
    Dataset::new(rows, schema).unwrap()
}

fn unaug_fixture() -> Dataset {
    plain(vec![
        subject(1, 1, 1, 0),
        subject(2, 1, 0, 1),
        subject(3, 1, 0, 0),
        subject(4, 1, 0, 2),
        subject(5, 0, 1, 1),
        subject(6, 0, 1, 0),
        subject(7, 0, 0, 3),
        subject(8, 0, 0, 0),
    ])
}

fn aug_fixture() -> Dataset {
    plain(vec![
        subject(1, 1, 1, 1),
        subject(2, 1, 0, 1),
        subject(3, 1, 0, 1),
        subject(4, 1, 0, 0),
        subject(5, 0, 1, 1),
        subject(6, 0, 1, 0),
        subject(7, 0, 0, 0),
        subject(8, 0, 0, 0),
    ])
}

fn joint_nc_fixture() -> Dataset {
    let mut rows = Vec::new();
    for i in 0..10 {
        rows.push(subject(i, 1, u8::from(i < 3), u32::from(i < 4)));
    }
    for i in 10..20 {
        let j = i - 10;
        rows.push(subject(i, 0, u8::from(j < 2), u32::from(j < 6)));
    }
    plain(rows)
}

fn mh_fixture() -> Dataset {
    let mut rows = vec![
        subject_at(1, 1, 1, 1, "a"),
        subject_at(2, 1, 0, 1, "a"),
        subject_at(3, 0, 1, 1, "a"),
        subject_at(4, 0, 1, 1, "a"),
    ];
    rows.push(subject_at(5, 1, 1, 1, "b"));
    for i in 6..=8 {
        rows.push(subject_at(i, 1, 0, 1, "b"));
    }
    rows.push(subject_at(9, 0, 1, 1, "b"));
    for i in 10..=12 {
        rows.push(subject_at(i, 0, 0, 1, "b"));
    }
    with_site(rows)
}

fn site_spec() -> StratumSpec {
    StratumSpec::new(vec!["site".to_string()])
}

#[test]
fn criterion_1_closed_form_fixtures() {
    let mut c = Criterion::new(1, "closed-form fixtures at 1e-10");

    let unaug = estimate_unaug(&unaug_fixture(), 0.95).unwrap();
    c.check_close("unaug beta1", unaug.beta1_hat, -0.6931471805599453, 1e-10);
    c.check_close("unaug sandwich SE", unaug.std_err, 1.0, 1e-10);

    let aug = estimate_aug(&aug_fixture(), Augmentation::Y2, None, 0.95).unwrap();
    c.check_close("aug beta1", aug.beta1_hat, -1.3862943611198906, 1e-10);

    let jnc = estimate_joint_nc(&joint_nc_fixture(), 0.95).unwrap();
    c.check_close("joint_nc beta1", jnc.beta1_hat, 2.25f64.ln(), 1e-10);
    c.check_close("joint_nc beta1 decimal", jnc.beta1_hat, 0.8109302162163288, 1e-10);

    let mh = estimate_mh(&mh_fixture(), &site_spec(), 0.95).unwrap();
    c.check_close("mh two-stratum beta1", mh.beta1_hat, (1.0f64 / 1.5).ln(), 1e-10);
    c.check_close("mh two-stratum decimal", mh.beta1_hat, -0.4054651081081645, 1e-10);

    let (pooled, variance) = pool_inverse_variance(&[(0.2, 0.01), (0.6, 0.04)]);
    c.check_close("pooled estimate", pooled, 0.28, 1e-10);
    c.check_close("pooled variance", variance, 0.008, 1e-10);

    c.finish();
}

#[test]
fn criterion_2_reduction_identities() {
    let mut c = Criterion::new(2, "reduction identities at 1e-12 (solver-based 1e-8)");

    // One-stratum MH = UnAug.
    let rows: Vec<SubjectRecord> = unaug_fixture()
        .records()
        .iter()
        .map(|r| subject_at(r.id.parse().unwrap(), r.t, r.y1, r.y2, "only"))
        .collect();
    let one_stratum = with_site(rows);
    let mh = estimate_mh(&one_stratum, &site_spec(), 0.95).unwrap();
    let unaug = estimate_unaug(&one_stratum, 0.95).unwrap();
    c.check_close("one-stratum mh = unaug", mh.beta1_hat, unaug.beta1_hat, 1e-12);

    // One-stratum Joint-MH = SS-Joint = Joint-NC.
    let rows: Vec<SubjectRecord> = joint_nc_fixture()
        .records()
        .iter()
        .map(|r| subject_at(r.id.parse().unwrap(), r.t, r.y1, r.y2, "only"))
        .collect();
    let one_stratum = with_site(rows);
    let jnc = estimate_joint_nc(&one_stratum, 0.95).unwrap();
    let jmh = estimate_joint_mh(&one_stratum, &site_spec(), 0.95).unwrap();
    c.check_close("one-stratum joint_mh = joint_nc", jmh.beta1_hat, jnc.beta1_hat, 1e-12);
    let ssj = estimate_ss_joint(&one_stratum, &site_spec(), 0.95).unwrap();
    c.check_close("one-stratum ss_joint = joint_nc", ssj.beta1_hat, jnc.beta1_hat, 1e-12);
    c.check_close("one-stratum ss_joint SE", ssj.std_err, jnc.std_err, 1e-12);

    // Intercept-only Joint-Reg = Joint-NC (Newton-based).
    let data = joint_nc_fixture();
    let jreg = estimate_joint_reg(&data, &RegressionSpec::intercept_only(), 0.95).unwrap();
    let jnc = estimate_joint_nc(&data, 0.95).unwrap();
    c.check_close("intercept-only joint_reg = joint_nc", jreg.beta1_hat, jnc.beta1_hat, 1e-8);

    // Constant conditional means: Aug = UnAug.
    let rows: Vec<SubjectRecord> = unaug_fixture()
        .records()
        .iter()
        .map(|r| subject(r.id.parse().unwrap(), r.t, r.y1, 1))
        .collect();
    let const_y2 = plain(rows);
    let aug = estimate_aug(&const_y2, Augmentation::Y2, None, 0.95).unwrap();
    let unaug = estimate_unaug(&const_y2, 0.95).unwrap();
    c.check_close("constant-mean aug = unaug", aug.beta1_hat, unaug.beta1_hat, 1e-12);

    // Joint-NC is invariant to integer rescaling of the count.
    let data = joint_nc_fixture();
    let base = estimate_joint_nc(&data, 0.95).unwrap();
    for k in [2u32, 3, 7] {
        let scaled_rows: Vec<SubjectRecord> = data
            .records()
            .iter()
            .map(|r| {
                let mut s = r.clone();
                s.y2 = r.y2 * k;
                s
            })
            .collect();
        let scaled = plain(scaled_rows);
        let result = estimate_joint_nc(&scaled, 0.95).unwrap();
        c.check_close(
            &format!("joint_nc invariant to y2 x{k}"),
            result.beta1_hat,
            base.beta1_hat,
            1e-12,
        );
    }

    c.finish();
}

#[test]
fn criterion_3_oracle_consistency_large_run() {
    let mut c = Criterion::new(
        3,
        "single large observational run against enumerated probability limits",
    );

    let scenario = load_preset("obs-single-type").unwrap();
    let mut config = prepare(&scenario).unwrap();
    config.n = 500_000;

    let beta1_true = -0.6931471805599453f64;
    let plim_jnc = plim_oracle(&config, PlimEstimator::JointNc).unwrap();
    c.check_close("enumerated joint plim equals beta1", plim_jnc, beta1_true, 1e-12);
    let plim_unaug = plim_oracle(&config, PlimEstimator::UnAug).unwrap();
    c.check(
        "unadjusted plim is confounded upward",
        plim_unaug > beta1_true + 0.3,
    );

    let cohort = generate(&config, 20_250_803).unwrap();
    let jnc = estimate_joint_nc(&cohort.dataset, 0.95).unwrap();
    let unaug = estimate_unaug(&cohort.dataset, 0.95).unwrap();

    let jnc_gap = (jnc.beta1_hat - beta1_true).abs();
    c.check(
        &format!(
            "joint_nc within 3 SE of beta1 (gap {jnc_gap:.5}, 3 SE {:.5})",
            3.0 * jnc.std_err
        ),
        jnc_gap < 3.0 * jnc.std_err,
    );
    let unaug_gap = (unaug.beta1_hat - plim_unaug).abs();
    c.check(
        &format!(
            "unaug within 3 SE of its confounded plim (gap {unaug_gap:.5}, 3 SE {:.5})",
            3.0 * unaug.std_err
        ),
        unaug_gap < 3.0 * unaug.std_err,
    );

    c.finish();
}

fn study(
    preset: &str,
    methods: &[Method],
    reps: usize,
    seed: u64,
    bootstrap: usize,
) -> nco_harness::StudySummary {
    let scenario = load_preset(preset).unwrap();
    let options = StudyOptions {
        reps,
        seed,
        workers: 0,
        n: Some(5000),
        ci_level: 0.95,
        bootstrap_replicates: bootstrap,
    };
    run_study(&scenario, methods, &options)
        .unwrap_or_else(|e| panic!("study on {preset} failed: {e}"))
        .summary
}

fn method_summary(
    summary: &nco_harness::StudySummary,
    method: Method,
) -> nco_harness::MethodSummary {
    summary
        .methods
        .iter()
        .find(|m| m.method == method)
        .expect("method present")
        .clone()
}

#[test]
fn criterion_4_randomized_trial_study() {
    let mut c = Criterion::new(
        4,
        "randomized coverage, augmented variance ratio, and incidence-ladder monotonicity",
    );
    let methods = [Method::UnAug, Method::Aug, Method::JointNc, Method::JointReg];

    // Medium incidence: nominal coverage and a ratio of at least one.
    let medium = study("rand-medium-medium", &methods, 1000, 41, 50);
    let unaug = method_summary(&medium, Method::UnAug);
    let aug = method_summary(&medium, Method::Aug);
    c.check(
        &format!("unaug coverage {:.4} in [0.93, 0.97]", unaug.coverage),
        (0.93..=0.97).contains(&unaug.coverage),
    );
    c.check(
        &format!("aug coverage {:.4} in [0.93, 0.97]", aug.coverage),
        (0.93..=0.97).contains(&aug.coverage),
    );
    let ratio_medium = aug.variance_ratio_vs_unaug.unwrap();
    c.check(
        &format!("medium variance ratio {ratio_medium:.4} >= 1.0"),
        ratio_medium >= 1.0,
    );

    // Mean sandwich SE tracks the empirical SD for every model-based method.
    for method in methods {
        let m = method_summary(&medium, method);
        let sd = m.empirical_variance.sqrt();
        let rel = (m.mean_std_err - sd).abs() / sd;
        c.check(
            &format!(
                "{method}: mean sandwich SE {:.5} within 10% of empirical SD {sd:.5}",
                m.mean_std_err
            ),
            rel < 0.10,
        );
    }

    // Incidence ladder with the large risk spread.
    let low = study("rand-low-large", &[Method::UnAug, Method::Aug], 1000, 42, 50);
    let high = study("rand-high-large", &[Method::UnAug, Method::Aug], 1000, 43, 50);
    let ladder = study("rand-medium-large", &[Method::UnAug, Method::Aug], 1000, 44, 50);
    let r_low = method_summary(&low, Method::Aug).variance_ratio_vs_unaug.unwrap();
    let r_med = method_summary(&ladder, Method::Aug).variance_ratio_vs_unaug.unwrap();
    let r_high = method_summary(&high, Method::Aug).variance_ratio_vs_unaug.unwrap();
    c.check(
        &format!("high-incidence variance ratio {r_high:.4} >= 1.05"),
        r_high >= 1.05,
    );
    c.check(
        &format!("monotone ratio low {r_low:.4} <= medium {r_med:.4} <= high {r_high:.4}"),
        r_low <= r_med && r_med <= r_high,
    );
    c.check(
        &format!(
            "high-incidence correlation {:.4} in the 0.33-0.40 regime",
            high.mean_corr_y1_y2
        ),
        (0.33..=0.40).contains(&high.mean_corr_y1_y2),
    );

    c.finish();
}

#[test]
fn criterion_5_observational_bias_ordering() {
    let mut c = Criterion::new(5, "observational bias ordering at desk scale");
    let methods = [Method::Mh, Method::JointNc, Method::JointMh, Method::JointReg];
    let summary = study("obs-medium-medium", &methods, 1000, 51, 200);

    let mh = method_summary(&summary, Method::Mh).mean_bias;
    let jnc = method_summary(&summary, Method::JointNc).mean_bias;
    let jmh = method_summary(&summary, Method::JointMh).mean_bias;
    let jreg = method_summary(&summary, Method::JointReg).mean_bias;

    c.check(&format!("bias(mh) {mh:.4} > 0.3"), mh > 0.3);
    c.check(
        &format!("bias(joint_nc) {jnc:.4} in (0.1, bias(mh) {mh:.4})"),
        jnc > 0.1 && jnc < mh,
    );
    c.check(&format!("|bias(joint_mh)| {:.4} < 0.1", jmh.abs()), jmh.abs() < 0.1);
    c.check(
        &format!("|bias(joint_reg)| {:.4} < 0.1", jreg.abs()),
        jreg.abs() < 0.1,
    );
    c.check(
        &format!(
            "|bias(joint_mh)| {:.4} <= |bias(joint_reg)| {:.4} + 0.02",
            jmh.abs(),
            jreg.abs()
        ),
        jmh.abs() <= jreg.abs() + 0.02,
    );

    c.finish();
}

#[test]
fn criterion_6_sensitivity_robustness() {
    let mut c = Criterion::new(
        6,
        "bias reduction persists under nonzero effects on the negative control",
    );
    let methods = [Method::Mh, Method::JointMh, Method::JointReg];
    for (preset, seed) in [("obs-medium-medium-nu1", 61), ("obs-medium-medium-nu2", 62)] {
        let summary = study(preset, &methods, 1000, seed, 200);
        let mh = method_summary(&summary, Method::Mh).mean_bias;
        let jmh = method_summary(&summary, Method::JointMh).mean_bias;
        let jreg = method_summary(&summary, Method::JointReg).mean_bias;
        c.check(&format!("{preset}: bias(mh) {mh:.4} > 0.3"), mh > 0.3);
        c.check(
            &format!("{preset}: |bias(joint_mh)| {:.4} < 0.15", jmh.abs()),
            jmh.abs() < 0.15,
        );
        c.check(
            &format!("{preset}: |bias(joint_reg)| {:.4} < 0.15", jreg.abs()),
            jreg.abs() < 0.15,
        );
    }
    c.finish();
}

#[test]
fn criterion_7_numerical_machinery() {
    let mut c = Criterion::new(
        7,
        "finite-difference Jacobians, bootstrap-vs-sandwich SE, worker invariance",
    );

    // Analytic vs finite-difference Jacobians for every shipped system.
    let mut schema = BTreeMap::new();
    schema.insert("age".to_string(), nco_core::CovariateKind::Numeric);
    let mut fd_rows = Vec::new();
    for i in 0..8 {
        let mut covariates = BTreeMap::new();
        covariates.insert(
            "age".to_string(),
            nco_core::CovariateValue::Numeric(15.0 + i as f64),
        );
        fd_rows.push(SubjectRecord {
            id: i.to_string(),
            t: (i % 2) as u8,
            y1: ((i / 2) % 2) as u8,
            y2: (i % 4) as u32,
            covariates,
        });
    }
    let fd_data = Dataset::new(fd_rows, schema).unwrap();
    let (m1, m0, _) = fit_arm_means(&aug_fixture(), Augmentation::Y2, None).unwrap();
    let aug_system = AugmentedTwoArmSystem {
        pi1_hat: 0.5,
        treated_mean: m1,
        control_mean: m0,
    };
    let design = Design::build(&fd_data, &[Term::linear("age")], true, false).unwrap();
    let binom = LogBinomialRegSystem {
        design: design.clone(),
    };
    let count = LogMeanRegSystem { design };

    let mut check_system = |name: &str, system: &dyn EstimatingSystem, thetas: &[Vec<f64>]| {
        for theta in thetas {
            for rec in fd_data.records() {
                if !system.admissible(rec, theta) {
                    continue;
                }
                let p = system.dim_theta();
                let mut analytic = vec![0.0; p * p];
                system.jacobian(rec, theta, &mut analytic);
                let fd = fd_jacobian(system, rec, theta);
                for (a, f) in analytic.iter().zip(&fd) {
                    let rel = (a - f).abs() / a.abs().max(1.0);
                    if rel >= 1e-5 {
                        c.check(
                            &format!("{name} jacobian: analytic {a} vs fd {f} (rel {rel:.2e})"),
                            false,
                        );
                    }
                }
            }
        }
    };
    check_system(
        "two-arm",
        &TwoArmLogRiskSystem,
        &[vec![-2.0, -0.5], vec![-1.5, 0.3], vec![-3.0, 1.0]],
    );
    check_system(
        "augmented",
        &aug_system,
        &[vec![-2.0, -0.5], vec![-1.2, -0.7]],
    );
    check_system(
        "joint-nc",
        &JointNcSystem,
        &[vec![-2.0, -0.5, 0.3, -0.2], vec![-1.5, 0.2, -1.0, 0.5]],
    );
    check_system(
        "log-binomial regression",
        &binom,
        &[vec![-3.0, -0.4, 0.02], vec![-4.0, 0.3, 0.05]],
    );
    check_system(
        "count regression",
        &count,
        &[vec![-1.0, -0.4, 0.03], vec![0.2, 0.3, -0.05]],
    );

    // Sandwich vs bootstrap SE for the joint estimator on a fixed cohort.
    let scenario = load_preset("obs-medium-medium").unwrap();
    let mut config = prepare(&scenario).unwrap();
    config.n = 2000;
    let cohort = generate(&config, 99).unwrap();
    let jnc = estimate_joint_nc(&cohort.dataset, 0.95).unwrap();
    let boot_se = {
        // Independent closed-form bootstrap of the joint estimate.
        let recs = cohort.dataset.records();
        let n = recs.len();
        let mut values = Vec::with_capacity(2000);
        for b in 0..2000u64 {
            let mut rng = Pcg64::seed_from_u64(derive_seed(7777, b));
            let (mut ty1, mut ty2, mut cy1, mut cy2) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            for _ in 0..n {
                let r = &recs[rng.random_range(0..n)];
                if r.t == 1 {
                    ty1 += f64::from(r.y1);
                    ty2 += f64::from(r.y2);
                } else {
                    cy1 += f64::from(r.y1);
                    cy2 += f64::from(r.y2);
                }
            }
            if ty1 > 0.0 && ty2 > 0.0 && cy1 > 0.0 && cy2 > 0.0 {
                values.push((ty1 / cy1).ln() + (cy2 / ty2).ln());
            }
        }
        let m = values.len() as f64;
        let mean = values.iter().sum::<f64>() / m;
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    };
    let rel = (jnc.std_err - boot_se).abs() / boot_se;
    c.check(
        &format!(
            "joint_nc sandwich SE {:.5} within 15% of bootstrap SE {boot_se:.5} (rel {rel:.3})",
            jnc.std_err
        ),
        rel < 0.15,
    );

    // Worker-count invariance of study summaries.
    let scenario = load_preset("rand-medium-medium").unwrap();
    let run_with = |workers: usize| {
        let options = StudyOptions {
            reps: 60,
            seed: 71,
            workers,
            n: Some(800),
            ci_level: 0.95,
            bootstrap_replicates: 40,
        };
        run_study(
            &scenario,
            &[Method::UnAug, Method::Aug, Method::Mh, Method::JointNc],
            &options,
        )
        .unwrap()
        .summary
    };
    let s1 = run_with(1);
    for workers in [4usize, 8] {
        let sw = run_with(workers);
        for (a, b) in s1.methods.iter().zip(&sw.methods) {
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-12;
            let same = close(a.mean_bias, b.mean_bias)
                && close(a.empirical_variance, b.empirical_variance)
                && close(a.coverage, b.coverage)
                && close(a.mean_std_err, b.mean_std_err)
                && a.successes == b.successes;
            c.check(
                &format!(
                    "summary for {} identical with {workers} workers",
                    a.method
                ),
                same,
            );
        }
    }

    c.finish();
}

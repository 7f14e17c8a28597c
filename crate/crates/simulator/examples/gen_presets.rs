//! Regenerates the scenario preset files in `presets/` and prints the
//! enumerated diagnostics (true effects, estimator limits, outcome
//! correlation) plus large-sample bias probes for the stratified and
//! regression estimators. Run from the workspace root:
//!
//! ```text
//! cargo run -p nco-simulator --example gen_presets            # print only
//! cargo run -p nco-simulator --example gen_presets -- --write # also write files
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use nco_simulator::{
    calibrate_intercepts, enumerated_correlation, marginal_mean_y2, plim_oracle, prepare,
    treatment_marginal, true_beta1_composite, CalibrationTargets, GeneratorConfig, OutcomeType,
    PlimEstimator, ScenarioConfig, StudyDesign, TreatmentModel, UnmeasuredRisk, AGE_LEVELS,
};

const LN_HALF: f64 = -0.6931471805599453;

const A_SMALL: [f64; 3] = [0.0, 0.75, 2.0];
const A_MEDIUM: [f64; 3] = [0.0, 1.0, 2.0];
const A_LARGE: [f64; 3] = [0.0, 1.0, 2.5];

const INC_LOW: (f64, f64) = (0.032, 0.015);
const INC_MEDIUM: (f64, f64) = (0.05, 0.05);
const INC_HIGH: (f64, f64) = (0.14, 0.07);

/// Risk-level probabilities, mildly increasing in age and varying by site.
fn risk_probs() -> [Vec<[f64; 3]>; 3] {
    let round4 = |x: f64| (x * 1e4).round() / 1e4;
    std::array::from_fn(|site| {
        AGE_LEVELS
            .iter()
            .map(|&age| {
                let s = site as f64 - 1.0;
                let high = round4(0.22 + 0.028 * (age - 18.0) + 0.06 * s);
                let low = round4(0.38 - 0.018 * (age - 18.0) - 0.045 * s);
                [low, 1.0 - low - high, high]
            })
            .collect()
    })
}

fn treatment_model() -> TreatmentModel {
    TreatmentModel {
        intercept: -3.58,
        age_coef: 0.12,
        site_coef: 0.90,
        risk_coef: 0.62,
    }
}

fn primary_types() -> Vec<OutcomeType> {
    ["16", "18"]
        .iter()
        .map(|label| OutcomeType {
            label: label.to_string(),
            intercept: (0.03f64).ln(),
            treat_effect: LN_HALF,
            age_slope: 0.05,
            site_effects: [-0.2, 0.0, 0.2],
        })
        .collect()
}

fn secondary_types(treat_effect: f64) -> Vec<OutcomeType> {
    (0..20)
        .map(|j| OutcomeType {
            label: format!("nt{:02}", j + 1),
            intercept: -3.0 + (j as f64 / 19.0 - 0.5),
            treat_effect,
            age_slope: 0.02,
            site_effects: [0.2, 0.0, -0.2],
        })
        .collect()
}

fn targets(incidence: (f64, f64)) -> CalibrationTargets {
    let mut map = BTreeMap::new();
    map.insert("16".to_string(), incidence.0);
    map.insert("18".to_string(), incidence.1);
    CalibrationTargets {
        incidence: map,
        mean_y2: Some(1.75),
    }
}

fn grid_scenario(
    design: StudyDesign,
    inc_name: &str,
    incidence: (f64, f64),
    a_name: &str,
    a_values: [f64; 3],
    beta2: f64,
    suffix: &str,
) -> ScenarioConfig {
    let design_tag = match design {
        StudyDesign::Randomized => "rand",
        StudyDesign::Observational => "obs",
    };
    let name = format!("{design_tag}-{inc_name}-{a_name}{suffix}");
    ScenarioConfig {
        generator: GeneratorConfig {
            name,
            design,
            n: 5000,
            n_nt: 20,
            unmeasured: UnmeasuredRisk {
                values: a_values,
                probs: risk_probs(),
            },
            treatment: treatment_model(),
            primary_types: primary_types(),
            secondary_types: secondary_types(beta2),
        },
        targets: Some(targets(incidence)),
    }
}

fn single_type_scenario() -> ScenarioConfig {
    let mut map = BTreeMap::new();
    map.insert("16".to_string(), 0.05);
    ScenarioConfig {
        generator: GeneratorConfig {
            name: "obs-single-type".to_string(),
            design: StudyDesign::Observational,
            n: 5000,
            n_nt: 20,
            unmeasured: UnmeasuredRisk {
                values: A_MEDIUM,
                probs: std::array::from_fn(|_| {
                    AGE_LEVELS.iter().map(|_| [0.38, 0.40, 0.22]).collect()
                }),
            },
            treatment: TreatmentModel {
                intercept: -0.72,
                age_coef: 0.0,
                site_coef: 0.0,
                risk_coef: 0.85,
            },
            primary_types: vec![OutcomeType {
                label: "16".to_string(),
                intercept: (0.05f64).ln(),
                treat_effect: LN_HALF,
                age_slope: 0.0,
                site_effects: [0.0; 3],
            }],
            secondary_types: (0..20)
                .map(|j| OutcomeType {
                    label: format!("nt{:02}", j + 1),
                    intercept: -3.0 + (j as f64 / 19.0 - 0.5),
                    treat_effect: 0.0,
                    age_slope: 0.0,
                    site_effects: [0.0; 3],
                })
                .collect(),
        },
        targets: Some(CalibrationTargets {
            incidence: map,
            mean_y2: Some(1.75),
        }),
    }
}

fn all_scenarios() -> Vec<ScenarioConfig> {
    let mut out = Vec::new();
    for design in [StudyDesign::Randomized, StudyDesign::Observational] {
        for (inc_name, inc) in [("low", INC_LOW), ("medium", INC_MEDIUM), ("high", INC_HIGH)] {
            for (a_name, a) in [("small", A_SMALL), ("medium", A_MEDIUM), ("large", A_LARGE)] {
                out.push(grid_scenario(design, inc_name, inc, a_name, a, 0.0, ""));
            }
        }
    }
    for (i, beta2) in [(-0.02f64), -0.076, -0.15].iter().enumerate() {
        out.push(grid_scenario(
            StudyDesign::Observational,
            "medium",
            INC_MEDIUM,
            "medium",
            A_MEDIUM,
            *beta2,
            &format!("-nu{}", i + 1),
        ));
    }
    out.push(single_type_scenario());
    out
}

fn probe_large_sample(config: &GeneratorConfig, truth: f64) {
    use nco_core::StratumSpec;
    use nco_estimators::{
        estimate_joint_mh_with, estimate_joint_reg, estimate_mh_with, BootstrapOptions,
        RegressionSpec, Term,
    };
    use nco_simulator::generate;

    let mut big = config.clone();
    big.n = 2_000_000;
    let cohort = generate(&big, 20_240_501).expect("generate");
    let spec = StratumSpec::new(vec!["site".to_string(), "age".to_string()]).with_cuts(
        "age",
        AGE_LEVELS[1..].to_vec(),
    );
    let fast = BootstrapOptions {
        replicates: 2,
        seed: 1,
    };
    let mh = estimate_mh_with(&cohort.dataset, &spec, 0.95, &fast).expect("mh");
    let jmh = estimate_joint_mh_with(&cohort.dataset, &spec, 0.95, &fast).expect("jmh");
    let reg_spec = RegressionSpec {
        primary_terms: vec![
            Term::linear("age"),
            Term::square("age"),
            Term::categorical("site"),
        ],
        secondary_terms: vec![
            Term::linear("age"),
            Term::square("age"),
            Term::categorical("site"),
        ],
    };
    let jreg = estimate_joint_reg(&cohort.dataset, &reg_spec, 0.95).expect("jreg");
    println!(
        "    large-n bias: mh {:+.4}  joint_mh {:+.4}  joint_reg {:+.4}",
        mh.beta1_hat - truth,
        jmh.beta1_hat - truth,
        jreg.beta1_hat - truth
    );
}

fn main() {
    let write = std::env::args().any(|a| a == "--write");
    let out_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../presets");

    for scenario in all_scenarios() {
        let name = scenario.generator.name.clone();
        let calibrated = match &scenario.targets {
            Some(t) => calibrate_intercepts(&scenario.generator, t).expect("calibration"),
            None => scenario.generator.clone(),
        };
        let truth = true_beta1_composite(&calibrated).expect("truth");
        let plim_u = plim_oracle(&calibrated, PlimEstimator::UnAug).expect("plim");
        let plim_j = plim_oracle(&calibrated, PlimEstimator::JointNc).expect("plim");
        let corr = enumerated_correlation(&calibrated).expect("corr");
        println!(
            "{name:24} truth {truth:+.4}  bias(unaug) {:+.4}  bias(jnc) {:+.4}  corr {corr:.3}  E[y2] {:.3}  E[T] {:.4}",
            plim_u - truth,
            plim_j - truth,
            marginal_mean_y2(&calibrated),
            treatment_marginal(&calibrated),
        );
        if name.starts_with("obs-medium-medium") || name == "obs-single-type" {
            probe_large_sample(&calibrated, truth);
        }

        if write {
            let text = toml::to_string_pretty(&scenario).expect("serialize");
            std::fs::write(out_dir.join(format!("{name}.toml")), text).expect("write");
        }
    }
    let check = prepare(&all_scenarios()[0]).expect("prepare");
    assert!(check.validate().is_ok());
    if write {
        println!("presets written to {}", out_dir.display());
    }
}

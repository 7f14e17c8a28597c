use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use nco_core::Method;
use nco_estimators::BootstrapOptions;
use nco_harness::{
    analyze, build_strata, emit_plot_data, load_cohort, parse_regression, read_rep_csv,
    render_report, report_json, run_study, summary_table, summary_toml, write_plot_csv,
    write_rep_csv, AnalysisOptions, HarnessError, StudyOptions,
};
use nco_simulator::{
    load_preset, load_scenario_file, prepare, preset_names, treatment_marginal, ScenarioConfig,
    StudyDesign,
};

/// Vaccine-efficacy estimation with negative-control outcomes: simulate
/// confounded cohorts, analyze cohort files, and export plot data.
#[derive(Parser)]
#[command(name = "nco", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo study of a scenario preset or scenario file.
    Simulate(SimulateArgs),
    /// Estimate a treatment effect from a cohort CSV.
    Analyze(AnalyzeArgs),
    /// Convert replication-level output into long-format plot data.
    Plotdata(PlotdataArgs),
    /// Inspect the shipped scenario presets.
    Presets(PresetsArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Preset name (see `nco presets list`) or path to a scenario TOML file.
    #[arg(long)]
    scenario: String,
    /// Cohort size per replication; defaults to the scenario's `n`.
    #[arg(long)]
    n: Option<usize>,
    /// Number of replications.
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Comma-separated method tags; defaults to the design-appropriate set.
    #[arg(long)]
    methods: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Output directory for `reps.csv` and `summary.toml`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.95)]
    ci: f64,
    /// Bootstrap replicates for the stratified estimators' standard errors.
    #[arg(long, default_value_t = 500)]
    bootstrap_reps: usize,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Cohort CSV with columns t, y1, y2 (or y2_type_*), optional id, and
    /// covariates.
    #[arg(long)]
    input: PathBuf,
    /// Method tag: unaug, aug, aug_w, aug_y2w, mh, joint_nc, ss_joint,
    /// joint_mh, or joint_reg.
    #[arg(long)]
    method: String,
    /// Comma-separated stratification keys, e.g. `site,age`.
    #[arg(long)]
    strata: Option<String>,
    /// Cut points for a numeric stratification key, `name=c1,c2,...`
    /// (repeatable).
    #[arg(long)]
    cuts: Vec<String>,
    /// Regression terms, `primary=age+age^2+site,secondary=age+site`.
    #[arg(long)]
    regress: Option<String>,
    /// Augmentation for `aug`-family methods: y2, w, or y2w (implied by
    /// the method tag).
    #[arg(long)]
    augment: Option<String>,
    #[arg(long, default_value_t = 0.95)]
    ci: f64,
    #[arg(long, default_value_t = 500)]
    bootstrap_reps: usize,
    #[arg(long, default_value_t = 42)]
    bootstrap_seed: u64,
    /// Write the machine-readable report (JSON) here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotdataArgs {
    /// Replication-level CSV produced by `nco simulate`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PresetsArgs {
    #[command(subcommand)]
    command: PresetsCommand,
}

#[derive(Subcommand)]
enum PresetsCommand {
    /// List preset names with design, incidence targets, and risk values.
    List,
}

fn load_scenario(spec: &str) -> Result<ScenarioConfig, HarnessError> {
    if preset_names().contains(&spec) {
        return Ok(load_preset(spec)?);
    }
    let path = PathBuf::from(spec);
    if path.exists() {
        return Ok(load_scenario_file(&path)?);
    }
    Err(HarnessError::InvalidScenario(format!(
        "`{spec}` is neither a preset name nor a scenario file"
    )))
}

fn parse_methods(text: &str) -> Result<Vec<Method>, HarnessError> {
    let mut methods = Vec::new();
    for tag in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let m = Method::from_str(tag).map_err(HarnessError::InvalidArguments)?;
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    if methods.is_empty() {
        return Err(HarnessError::InvalidArguments(
            "empty method list".to_string(),
        ));
    }
    Ok(methods)
}

fn default_methods(design: StudyDesign) -> Vec<Method> {
    match design {
        StudyDesign::Randomized => vec![Method::UnAug, Method::Aug, Method::AugW, Method::AugY2W],
        StudyDesign::Observational => vec![
            Method::Mh,
            Method::JointNc,
            Method::SsJoint,
            Method::JointMh,
            Method::JointReg,
        ],
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), HarnessError> {
    let scenario = load_scenario(&args.scenario)?;
    let methods = match &args.methods {
        Some(text) => parse_methods(text)?,
        None => default_methods(scenario.generator.design),
    };
    let options = StudyOptions {
        reps: args.reps,
        seed: args.seed,
        workers: args.workers,
        n: args.n,
        ci_level: args.ci,
        bootstrap_replicates: args.bootstrap_reps,
    };
    let output = run_study(&scenario, &methods, &options)?;

    std::fs::create_dir_all(&args.out)?;
    write_rep_csv(&output.records, &args.out.join("reps.csv"))?;
    std::fs::write(
        args.out.join("summary.toml"),
        summary_toml(&output.summary),
    )?;
    print!("{}", summary_table(&output.summary));
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), HarnessError> {
    let method = Method::from_str(&args.method).map_err(HarnessError::InvalidArguments)?;
    if let Some(augment) = &args.augment {
        let implied = match method {
            Method::Aug => "y2",
            Method::AugW => "w",
            Method::AugY2W => "y2w",
            _ => {
                return Err(HarnessError::InvalidArguments(
                    "--augment only applies to the aug-family methods".to_string(),
                ))
            }
        };
        if augment != implied {
            return Err(HarnessError::InvalidArguments(format!(
                "--augment {augment} conflicts with --method {method} (implies {implied})"
            )));
        }
    }
    let data = load_cohort(&args.input)?;
    let strata = match &args.strata {
        Some(keys) => {
            let keys: Vec<String> = keys
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect();
            Some(build_strata(&keys, &args.cuts, &data)?)
        }
        None => None,
    };
    let regression = match &args.regress {
        Some(text) => Some(parse_regression(text, &data)?),
        None => None,
    };
    let options = AnalysisOptions {
        strata,
        regression,
        ci_level: args.ci,
        bootstrap: BootstrapOptions {
            replicates: args.bootstrap_reps,
            seed: args.bootstrap_seed,
        },
    };
    let result = analyze(&data, method, &options)?;
    print!("{}", render_report(&result, data.n()));
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report_json(&result, data.n()))
            .expect("report serialization");
        std::fs::write(path, json)?;
    }
    Ok(())
}

fn cmd_plotdata(args: &PlotdataArgs) -> Result<(), HarnessError> {
    let records = read_rep_csv(&args.input)?;
    let rows = emit_plot_data(&records)?;
    write_plot_csv(&rows, &args.out)?;
    println!("{} rows written to {}", rows.len(), args.out.display());
    Ok(())
}

fn cmd_presets() -> Result<(), HarnessError> {
    println!(
        "{:<26} {:<14} {:<16} {:<18} {}",
        "name", "design", "incidence", "risk values", "E[T]"
    );
    for name in preset_names() {
        let scenario = load_preset(name)?;
        let config = prepare(&scenario)?;
        let design = match config.design {
            StudyDesign::Randomized => "randomized",
            StudyDesign::Observational => "observational",
        };
        let incidence = scenario
            .targets
            .as_ref()
            .map(|t| {
                t.incidence
                    .values()
                    .map(|v| format!("{v}"))
                    .collect::<Vec<_>>()
                    .join("/")
            })
            .unwrap_or_else(|| "-".to_string());
        let values = config
            .unmeasured
            .values
            .iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(", ");
        println!(
            "{name:<26} {design:<14} {incidence:<16} {values:<18} {:.3}",
            treatment_marginal(&config)
        );
    }
    Ok(())
}

fn run() -> Result<(), HarnessError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Plotdata(args) => cmd_plotdata(args),
        Command::Presets(args) => match args.command {
            PresetsCommand::List => cmd_presets(),
        },
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

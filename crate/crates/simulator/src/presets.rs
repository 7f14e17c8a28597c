//! Scenario presets and scenario-file loading.
//!
//! A scenario file is a TOML document with a `[generator]` table (the full
//! data-generating process) and an optional `[targets]` table with
//! calibration targets. The shipped presets live in `presets/` at the
//! repository root and are embedded here; `presets/README.md` documents the
//! key set and how the files were produced.

use serde::{Deserialize, Serialize};

use crate::calibrate::{calibrate_intercepts, CalibrationTargets};
use crate::config::GeneratorConfig;
use crate::error::SimulatorError;

/// A generator config plus optional calibration targets, as read from a
/// scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub generator: GeneratorConfig,
    #[serde(default)]
    pub targets: Option<CalibrationTargets>,
}

/// Applies the scenario's calibration targets (when present) and returns a
/// validated generator config ready for [`crate::generate`].
pub fn prepare(scenario: &ScenarioConfig) -> Result<GeneratorConfig, SimulatorError> {
    match &scenario.targets {
        Some(targets) => calibrate_intercepts(&scenario.generator, targets),
        None => {
            scenario.generator.validate()?;
            Ok(scenario.generator.clone())
        }
    }
}

pub fn scenario_from_str(text: &str) -> Result<ScenarioConfig, SimulatorError> {
    Ok(toml::from_str(text)?)
}

/// Reads a scenario file from disk.
pub fn load_scenario_file(path: &std::path::Path) -> Result<ScenarioConfig, SimulatorError> {
    let text = std::fs::read_to_string(path)?;
    scenario_from_str(&text)
}

macro_rules! presets {
    ($($name:literal),+ $(,)?) => {
        const PRESETS: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../../../presets/", $name, ".toml")))),+
        ];
    };
}

presets![
    "rand-low-small",
    "rand-low-medium",
    "rand-low-large",
    "rand-medium-small",
    "rand-medium-medium",
    "rand-medium-large",
    "rand-high-small",
    "rand-high-medium",
    "rand-high-large",
    "obs-low-small",
    "obs-low-medium",
    "obs-low-large",
    "obs-medium-small",
    "obs-medium-medium",
    "obs-medium-large",
    "obs-high-small",
    "obs-high-medium",
    "obs-high-large",
    "obs-medium-medium-nu1",
    "obs-medium-medium-nu2",
    "obs-medium-medium-nu3",
    "obs-single-type",
];

/// Names of the shipped scenario presets: the full randomized and
/// observational incidence-by-risk-spread grids, sensitivity variants with
/// a nonzero vaccine effect on the non-targeted outcomes, and the
/// single-targeted-type covariate-free scenario used for oracle checks.
pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(name, _)| *name).collect()
}

/// Loads a shipped preset by name.
pub fn load_preset(name: &str) -> Result<ScenarioConfig, SimulatorError> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| SimulatorError::UnknownPreset(name.to_string()))?;
    scenario_from_str(text)
}

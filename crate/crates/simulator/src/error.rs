use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimulatorError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),

    #[error(
        "calibration target {target} for `{label}` is unreachable; the validity bound caps the marginal at {max_achievable:.6}"
    )]
    TargetUnreachable {
        label: String,
        target: f64,
        max_achievable: f64,
    },

    #[error("unknown scenario preset `{0}`")]
    UnknownPreset(String),

    #[error("failed to read scenario file: {0}")]
    Io(#[from] std::io::Error),

    #[error("failed to parse scenario file: {0}")]
    Parse(#[from] toml::de::Error),

    #[error(transparent)]
    Core(#[from] nco_core::CoreError),
}

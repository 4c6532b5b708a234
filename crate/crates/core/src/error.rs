use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("link `{link}` has zero distance")]
    ZeroDistance { link: &'static str },

    #[error("link `{link}` LoS fraction {kappa} lies outside [0, 1]")]
    LosFractionOutOfRange { link: &'static str, kappa: f64 },

    #[error("a single-tap link cannot carry NLoS power (kappa = {kappa})")]
    NlosWithoutTaps { kappa: f64 },

    #[error("cascaded length {taps} exceeds {len} subcarriers")]
    LengthOverflow { taps: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("pilot entry {index} is zero")]
    ZeroPilotEntry { index: usize },

    #[error("negative power {value} on subcarrier {index}")]
    NegativePower { index: usize, value: f64 },

    #[error("invalid channel gain {value} on subcarrier {index}")]
    InvalidGain { index: usize, value: f64 },

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("expected {expected} training estimates for the DFT patterns, got {actual}")]
    PatternCountMismatch { expected: usize, actual: usize },

    #[error("training patterns are singular")]
    SingularPatterns,

    #[error("scheme `{scheme}` cannot be swept along axis `{axis}`")]
    InvalidSweep {
        scheme: &'static str,
        axis: &'static str,
    },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("malformed channel dump at line {line}: {reason}")]
    MalformedDump { line: usize, reason: String },

    #[error("failed to parse config: {0}")]
    ConfigParse(#[from] toml::de::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("phase {0} outside [0, 1]")]
    PhaseDomain(f64),

    #[error("gait has no finite period (standing gait)")]
    NoTimeScale,

    #[error("gait library is empty")]
    EmptyLibrary,

    #[error("period index {index} out of range (library has {len} periods)")]
    PeriodIndex { index: usize, len: usize },

    #[error("{axis} query {value} outside grid [{min}, {max}]")]
    OutOfRange {
        axis: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("CoM height {0} is not positive; pendulum model is singular")]
    Singularity(f64),

    #[error("prediction failed: {0}")]
    PredictionFailed(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("footstrike ({x:.4}, {y:.4}) for gait {label} outside kinematic reach")]
    Unreachable { label: String, x: f64, y: f64 },

    #[error("gain gate failed: {0}")]
    GainGate(String),

    #[error("stability property violated: {0}")]
    PropertyViolation(String),

    #[error("invalid bound: b = {b} must exceed eps/(1-k) = {floor}")]
    InvalidBound { b: f64, floor: f64 },

    #[error("{}:{line}: {msg}", source_name.display())]
    Parse {
        source_name: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(source_name: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

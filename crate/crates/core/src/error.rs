use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate environment: white fraction {white}, black fraction {black}")]
    DegenerateEnvironment { white: f64, black: f64 },

    #[error("difficulty {0} is outside (0, 1]")]
    InvalidDifficulty(f64),

    #[error("position ({x}, {y}) lies outside the arena")]
    OutOfArena { x: f64, y: f64 },

    #[error("wheel speed {0} m/s exceeds the maximum of 0.10 m/s")]
    WheelSpeed(f64),

    #[error("w is undefined for an empty message queue")]
    UndefinedSensor,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("could not place {robots} robots without overlap after {attempts} attempts")]
    Placement { robots: usize, attempts: usize },

    #[error("background data set is empty")]
    EmptyBackground,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Config errors map to exit code 2 in the CLI; everything else to 1.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidDifficulty(_) | Error::Parse(_)
        )
    }
}

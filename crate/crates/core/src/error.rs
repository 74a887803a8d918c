use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("path delay {delay_s:e} s exceeds the unambiguous delay range {range_s:e} s")]
    DelayAliasing { delay_s: f64, range_s: f64 },

    #[error("path set must carry complex amplitudes for synthesis")]
    NotAmplitudes,

    #[error("empty path set")]
    EmptyPathSet,

    #[error("no paths above threshold")]
    NoPathsAboveThreshold,

    #[error("no power above noise")]
    NoPowerAboveNoise,

    #[error("operation requires a {expected} matrix")]
    WrongLayout { expected: &'static str },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("delay grid too short for noise estimation ({0} bins, need at least 20)")]
    DegenerateGrid(usize),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

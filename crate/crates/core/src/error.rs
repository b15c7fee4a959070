use std::path::PathBuf;

use thiserror::Error;

use crate::interval::Interval;

pub type Result<T, E = MtfError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum MtfError {
    #[error("invalid interval [{start}, {end}]: need 1 <= start <= end")]
    InvalidInterval { start: usize, end: usize },

    #[error("interval {inner} is not contained in {outer}")]
    NotNested { inner: Interval, outer: Interval },

    #[error("index {index} does not lie in {interval}")]
    IndexOutside { index: usize, interval: Interval },

    #[error("index {index} is outside 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("{interval} is not a dyadified interval of index {index}")]
    NotInFamily { index: usize, interval: Interval },

    #[error("series must be non-empty")]
    EmptySeries,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl MtfError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        MtfError::InvalidArgument(msg.into())
    }
}

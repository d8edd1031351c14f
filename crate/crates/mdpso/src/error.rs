use std::io;
use std::path::PathBuf;

use mdpso_core::stats::StatsError;
use mdpso_core::timeseries::SeriesError;
use mdpso_core::wrapper::WrapperError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}: {source}")]
    Series {
        path: PathBuf,
        #[source]
        source: SeriesError,
    },
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("{model}: {source}")]
    Model {
        model: String,
        #[source]
        source: WrapperError,
    },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("self-test failed: {0} of {1} criteria did not pass")]
    SelfTest(usize, usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for bad input or configuration, 2 for failures during computation.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Parse { .. }
            | Error::Series { .. }
            | Error::Config { .. }
            | Error::Invalid(_) => 1,
            Error::Io { source, .. } if source.kind() == io::ErrorKind::NotFound => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

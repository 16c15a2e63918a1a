use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// One entry per violated invariant.
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    InvalidConfig(Vec<String>),

    #[error("infeasible workload {workload} > 1 at t = {time}s")]
    Infeasible { workload: f64, time: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite plant state in loop {loop_index} at t = {time}s")]
    NonFinite { loop_index: usize, time: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("malformed trace: {0}")]
    MalformedTrace(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 config, 2 infeasibility, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) | Error::UnknownPreset(_) | Error::InvalidArgument(_) => 1,
            Error::Infeasible { .. } | Error::NonFinite { .. } => 2,
            Error::Io { .. } | Error::Csv(_) | Error::MalformedTrace(_) => 3,
        }
    }
}

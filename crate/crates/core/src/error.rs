use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("{func}: domain error: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("root bracket [{lo}, {hi}] has no sign change (f(lo)={f_lo}, f(hi)={f_hi})")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{malformed} of {total} lines malformed (first: line {first_line}: {first_reason})")]
    DataQuality {
        malformed: usize,
        total: usize,
        first_line: usize,
        first_reason: String,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error class.
    ///
    /// 2 I/O, 3 data quality, 4 insufficient data, 5 numerical
    /// non-convergence, 1 anything else (invalid arguments, domain errors).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            Error::DataQuality { .. } | Error::Json { .. } | Error::Csv { .. } => 3,
            Error::InsufficientData(_) => 4,
            Error::NonConvergence { .. } | Error::NoSignChange { .. } => 5,
            Error::Domain { .. } | Error::Invalid(_) => 1,
        }
    }
}

use std::path::PathBuf;

use chrono::NaiveDateTime;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("no rows left after complete-case filtering ({dropped} dropped)")]
    EmptyData { dropped: usize },

    #[error("item '{0}' is degenerate: {1}")]
    DegenerateItem(String, String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("collinear design matrix: column(s) {} depend on earlier columns", .0.join(", "))]
    Collinear(Vec<String>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("{} unfillable gap(s), first at {}", .0.len(), fmt_gap(.0))]
    UnfillableGap(Vec<(NaiveDateTime, NaiveDateTime)>),

    #[error("grid of {count} candidates exceeds the configured maximum of {max}")]
    GridTooLarge { count: u128, max: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("candidate k={k}: {source}")]
    Candidate {
        k: usize,
        #[source]
        source: Box<Error>,
    },
}

fn fmt_gap(gaps: &[(NaiveDateTime, NaiveDateTime)]) -> String {
    match gaps.first() {
        Some((a, b)) => format!("{a}..={b}"),
        None => "-".to_string(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl std::fmt::Display, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            line,
            message: message.into(),
        }
    }
}

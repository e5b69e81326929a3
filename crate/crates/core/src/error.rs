use std::path::PathBuf;

use thiserror::Error;

use crate::stumps::StumpHypothesis;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("label column {0} not found")]
    MissingLabelColumn(String),

    #[error("unknown label value {value:?} on line {line}")]
    UnknownLabel { value: String, line: usize },

    #[error("non-numeric feature {value:?} on line {line}, column {column}")]
    NonNumericFeature {
        value: String,
        line: usize,
        column: usize,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error("empty hypothesis space")]
    EmptyHypothesisSpace,

    #[error("perfect hypothesis exists: {stump:?} misclassifies no training example")]
    PerfectHypothesis { stump: StumpHypothesis },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("not a point of the simplex: {0}")]
    NotInSimplex(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

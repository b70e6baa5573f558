use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV near row {row}: {message}")]
    Csv { row: usize, message: String },

    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("class column {0} not found")]
    MissingClassColumn(String),

    #[error("table has no data rows")]
    EmptyTable,

    #[error("feature column '{column}' is constant (a single category '{category}')")]
    ConstantFeature { column: String, category: String },

    #[error("feature {feature} appears more than once in a branch")]
    DuplicateFeature { feature: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dataset and model disagree: {0}")]
    Mismatch(String),

    #[error("feature {feature} has category index {value} but only {categories} categories")]
    FeatureRange {
        feature: usize,
        value: u32,
        categories: usize,
    },

    #[error("row {row}: unknown category '{value}' in column '{column}'")]
    UnknownCategory {
        row: usize,
        column: String,
        value: String,
    },

    #[error("instance too large to enumerate: {0}")]
    SizeGuard(String),

    #[error("unknown format '{0}'")]
    UnknownFormat(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("invalid suite file: {0}")]
    Suite(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

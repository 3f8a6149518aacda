use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by dataset handling, tree induction and model I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    Parse {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("row {row}, column {column}: value {value:?} is not finite")]
    NonFinite {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("label column {0:?} not found")]
    UnknownColumn(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("feature matrix has {rows} rows but {labels} labels")]
    LabelCountMismatch { rows: usize, labels: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("subset is empty")]
    EmptySubset,

    #[error("row index {index} out of range for {rows} rows")]
    RowOutOfRange { index: usize, rows: usize },

    #[error("row index {0} appears more than once in subset")]
    DuplicateRow(usize),

    #[error("split on X{} <= {threshold} leaves one side empty", .feature + 1)]
    DegenerateSplit { feature: usize, threshold: f64 },

    #[error("expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("input value {0} is not finite")]
    NonFiniteInput(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("compression failed: {0}")]
    Compression(#[source] io::Error),

    #[error("model line {line}: {message}")]
    ModelParse { line: usize, message: String },

    #[error("model uses attribute X{} but data has {available} columns", .attribute + 1)]
    AttributeOutOfRange { attribute: usize, available: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

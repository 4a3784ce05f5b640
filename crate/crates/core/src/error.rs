use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch ({left} vs {right})")]
    DimensionMismatch {
        op: &'static str,
        left: String,
        right: String,
    },

    #[error("{0}")]
    InvalidShape(String),

    #[error("{op}: argument {value} outside the domain")]
    Domain { op: &'static str, value: f64 },

    #[error("node {index} belongs to tape {node_tape}, not tape {tape}")]
    ForeignNode {
        index: usize,
        node_tape: u64,
        tape: u64,
    },

    #[error("label {value} at row {row} is not 0 or 1")]
    NonBinaryLabel { row: usize, value: f64 },

    #[error("penalty weight must be non-negative, got {0}")]
    NegativePenalty(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("diverged at iteration {iteration}: non-finite {what}")]
    Divergence { iteration: usize, what: &'static str },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}, column `{column}`: cannot parse {cell:?} as a number")]
    Parse {
        row: usize,
        column: String,
        cell: String,
    },

    #[error("unknown column `{name}` (available: {available})")]
    UnknownColumn { name: String, available: String },

    #[error("positive label `{label}` not found; observed labels: {observed}")]
    UnknownLabel { label: String, observed: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dataset already has an intercept column")]
    DoubleIntercept,
}

impl Error {
    pub(crate) fn mismatch(op: &'static str, left: impl ToString, right: impl ToString) -> Self {
        Error::DimensionMismatch {
            op,
            left: left.to_string(),
            right: right.to_string(),
        }
    }
}

//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv parse error at data row {row}, column {column}: {message}")]
    CsvCell {
        row: usize,
        column: String,
        message: String,
    },

    #[error("csv file has {found} columns, need at least 2 (features + target)")]
    TooFewColumns { found: usize },

    #[error("csv file has a header but no data rows")]
    NoRows,

    #[error("target column {0:?} not found in header")]
    MissingTargetColumn(String),

    #[error("column {0:?} is constant; cannot normalize")]
    ConstantColumn(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("layer {layer} shape mismatch: expected {expected:?}, found {found:?}")]
    LayerShapeMismatch {
        layer: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("checkpoint has {found} parameters, architecture needs {expected}")]
    ParamCountMismatch { expected: usize, found: usize },

    #[error("malformed checkpoint: {0}")]
    MalformedCheckpoint(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("empty split: fraction {fraction} of {n} rows leaves one side empty")]
    EmptySplit { fraction: f64, n: usize },

    #[error("forward pass fault: {0}")]
    ForwardFault(String),

    #[error("non-finite gradient at parameter index {index}")]
    NonFiniteGradient { index: usize },

    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("ground-truth value at index {index} is zero; MAPE undefined")]
    ZeroTarget { index: usize },

    #[error("Cholesky factorization failed even at maximum jitter {max_jitter}")]
    CholeskyFailure { max_jitter: f64 },

    #[error("SMO did not converge in {iterations} iterations (KKT violation {kkt_violation})")]
    SmoNonConvergence {
        iterations: usize,
        kkt_violation: f64,
    },

    #[error("all {0} trials failed")]
    AllTrialsFailed(usize),

    #[error("collocation point {x} outside domain [{lo}, {hi}]")]
    OutsideDomain { x: f64, lo: f64, hi: f64 },

    #[error("{0}")]
    Other(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code class for the CLI: 2 for data problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. }
            | Error::CsvCell { .. }
            | Error::TooFewColumns { .. }
            | Error::NoRows
            | Error::MissingTargetColumn(_)
            | Error::ConstantColumn(_)
            | Error::EmptyDataset
            | Error::EmptySplit { .. }
            | Error::MalformedCheckpoint(_)
            | Error::ParamCountMismatch { .. } => 2,
            Error::InvalidConfig(_) => 1,
            _ => 3,
        }
    }
}

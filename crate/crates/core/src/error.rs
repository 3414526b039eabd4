use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = FdecError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FdecError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid degree {degree}: expected one of {expected}")]
    InvalidDegree { degree: usize, expected: &'static str },

    #[error("invalid fractional order {value}: {reason}")]
    InvalidOrder { value: f64, reason: &'static str },

    #[error("dimension mismatch in {op}: {lhs:?} vs {rhs:?}")]
    DimensionMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },

    #[error("dimension overflow in {0}")]
    Overflow(&'static str),

    #[error("singular matrix: diagonal entry {value} at row {row}")]
    Singular { row: usize, value: f64 },

    #[error("matrix is not lower triangular: entry ({row}, {col})")]
    NotTriangular { row: usize, col: usize },

    #[error("zero or negative diagonal scaling entry {value} at index {index}")]
    ZeroDiagonal { index: usize, value: f64 },

    #[error("missing analytic partial of component {component} along axis {axis}")]
    MissingPartial { component: usize, axis: char },

    #[error("point {point:?} lies outside the domain")]
    OutsideDomain { point: [f64; 3] },

    #[error("singular evaluation: {0}")]
    SingularEvaluation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown field '{0}'")]
    UnknownField(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl FdecError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FdecError::Io {
            path: path.into(),
            source,
        }
    }
}

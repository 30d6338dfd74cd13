use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QrError {
    #[error("index ({row}, {col}) out of range for {rows}x{cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix must have at least one row and one column, got {rows}x{cols}")]
    EmptyMatrix { rows: usize, cols: usize },
    #[error("empty vector")]
    EmptyVector,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("partial norm is zero; zero columns must be skipped by the caller")]
    ZeroNorm,
    #[error("row {0} is zero")]
    ZeroRow(usize),
    #[error("column {0} is zero")]
    ZeroColumn(usize),
    #[error("matrix is not upper triangular: nonzero entry at ({row}, {col})")]
    NotUpperTriangular { row: usize, col: usize },
    #[error("wrong-column injection: column {column} with offset {offset} addresses no column of an n={cols} matrix")]
    InjectionOutOfRange {
        column: usize,
        offset: isize,
        cols: usize,
    },
    #[error("excess-precision control injection needs single working precision")]
    UnsupportedInjection,
}

pub type Result<T> = core::result::Result<T, QrError>;

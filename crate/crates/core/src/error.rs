use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("block shape {rows}x{cols} has more rows than columns; the tail norm is undefined")]
    Shape { rows: usize, cols: usize },

    #[error("windows leave gaps: {}", format_gaps(.gaps))]
    Coverage { gaps: Vec<(f64, f64)> },

    #[error("nu = {0} is not covered by any window in the table")]
    NotCovered(f64),

    #[error("geometry class mismatch: {0}")]
    ClassMismatch(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("field is not mean-zero (|a00| = {0:e})")]
    NotMeanZero(f64),

    #[error("eigen-solver failure: {0}")]
    Eigen(String),

    #[error("index range overflow: {0}")]
    IndexOverflow(String),

    #[error("insufficient data: {0}")]
    InsufficientRange(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_gaps(gaps: &[(f64, f64)]) -> String {
    gaps.iter()
        .map(|(a, b)| format!("({a:.6}, {b:.6})"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

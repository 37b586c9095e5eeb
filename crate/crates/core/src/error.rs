use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tensor space d^t = {d}^{t} exceeds the capacity cap {cap}")]
    Capacity { d: usize, t: usize, cap: usize },

    #[error("partition {rows:?} has more than {d} rows")]
    Shape { rows: Vec<usize>, d: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: String, actual: String },

    #[error("Schur basis construction failed: {0}")]
    Construction(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("adaptive quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    Integration { estimate: f64, error: f64 },

    #[error("postselection impossible: block {block} has weight {weight:e}")]
    Postselection { block: usize, weight: f64 },

    #[error("state invariant violated: {0}")]
    State(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

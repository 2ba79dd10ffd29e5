use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    Shape(String),
    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("trace {0} deviates from 1 by {1:.3e}")]
    Trace(f64, f64),
    #[error("operator is not positive (min eigenvalue {0:.3e})")]
    NotPositive(f64),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("state violates the required symmetry (deviation {0:.3e})")]
    Symmetry(f64),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid spin: {0}")]
    InvalidSpin(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("no closed form for t = {t}; evaluate with the oracle instead")]
    NoClosedForm { t: f64 },

    #[error("input is not anti-Hermitian (max |G + G^H| = {0:e})")]
    NotAntiHermitian(f64),

    #[error("oracle did not converge: est_error {est_error:e} > tol {tol:e} at dim {dim}")]
    NoConvergence { dim: usize, est_error: f64, tol: f64 },

    #[error("singular exchange parameters: |f| = {0:e}")]
    SingularExchange(f64),

    #[error("series tail not converged: last term {last:e} at k = {k}")]
    TailNotConverged { k: usize, last: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

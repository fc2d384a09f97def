use thiserror::Error;

/// Errors produced by the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an evaluator.
    #[error("domain error: {0}")]
    Domain(String),

    /// A geometric or weight configuration violates a structural hypothesis.
    #[error("configuration error: {0}")]
    Config(String),

    /// An iterative scheme exhausted its budget.
    #[error("convergence failure in {what}: residual {residual:.3e} after {iterations} iterations")]
    Convergence {
        what: &'static str,
        residual: f64,
        iterations: usize,
    },

    /// A linear solve or other numeric kernel broke down.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

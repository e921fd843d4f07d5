use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// β below the smallest evaluable inverse temperature for an unbounded ladder.
    #[error("partition function diverges: beta = {beta} is below beta_min = {beta_min}")]
    Divergence { beta: f64, beta_min: f64 },

    /// The series tail could not be certified; `partial` is the sum reached so far.
    #[error("series did not certify its tail after {terms} terms (partial sum {partial})")]
    ConvergenceFailure { partial: f64, terms: usize },

    /// Truncation remainder wider than the requested tolerance.
    #[error("remainder bracket {bracket:e} exceeds tolerance {tol:e} (partial value {value})")]
    PrecisionFailure { value: f64, bracket: f64, tol: f64 },

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("numeric differentiation failure: {0}")]
    NumericDifferentiation(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },

    #[error("subdivision limit of {limit} reached (value {value:e}, error estimate {error:e})")]
    SubdivisionLimit { limit: usize, value: f64, error: f64 },

    #[error("integrand returned a non-finite value at x = {0}")]
    NonFinite(f64),

    #[error("semi-infinite integral does not settle: {0}")]
    Divergence(String),

    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("target {target} is outside the attainable range [{min}, {max}] on the threshold bracket")]
    NoBracket { target: f64, min: f64, max: f64 },

    #[error("invalid network parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("invalid Monte Carlo configuration: {0}")]
    Config(String),

    #[error("rate is undefined: {0}")]
    RateDivergence(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

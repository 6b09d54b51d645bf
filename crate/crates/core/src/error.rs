use thiserror::Error;

/// Errors raised by the analytic evaluators, the simulator and the CLI.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Parameters violate a model or scheme invariant.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    /// A numerical procedure did not reach its requested accuracy.
    #[error("accuracy target not reached: best estimate {estimate}, error bound {error_bound}")]
    Accuracy { estimate: f64, error_bound: f64 },
    /// The operation does not apply to the model's regime.
    #[error("state error: {0}")]
    State(String),
    /// Monte Carlo estimation could not produce a result.
    #[error("estimation error: {0}")]
    Estimation(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    pub(crate) fn state(msg: impl Into<String>) -> Self {
        Error::State(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A derived quantity (typically a correlation) falls outside its admissible range.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// The combination of dependence regime, correlation sequence and norming scheme
    /// is not covered by any limit result.
    #[error("invalid combination: {0}")]
    InvalidCombination(String),

    #[error("quadrature did not converge: value {value:e}, error estimate {error_estimate:e} after {evaluations} evaluations")]
    Quadrature {
        value: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

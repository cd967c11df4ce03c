use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the analytic kernels and the Lindblad solver.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("pole: {what} is a nonpositive integer ({at})")]
    Pole { what: &'static str, at: Complex64 },

    #[error("series did not converge after {terms} terms ({what})")]
    NonConvergence { what: &'static str, terms: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("singular steady-state system: {0}")]
    SingularSystem(String),

    #[error("iterative solver did not converge: {0}")]
    NoConvergence(String),

    #[error("degenerate state: {0}")]
    DegenerateState(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Short machine-readable tag, used in sweep failure records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Pole { .. } => "pole",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Domain(_) => "domain",
            Error::InvalidParams(_) => "invalid_params",
            Error::Dimension(_) => "dimension",
            Error::SingularSystem(_) => "singular_system",
            Error::NoConvergence(_) => "no_convergence",
            Error::DegenerateState(_) => "degenerate_state",
        }
    }
}

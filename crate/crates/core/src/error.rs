use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or iteration did not reach its tolerance.
    #[error("{what} did not converge after {iterations} iterations")]
    Convergence { what: &'static str, iterations: usize },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    /// Threshold search could not bracket the target probability.
    #[error("cannot bracket target probability {target} below threshold {limit}")]
    Bracketing { target: f64, limit: f64 },

    /// A Markov chain has no unique stationary distribution.
    #[error("degenerate Markov chain: p01 = {p01}, p11 = {p11}")]
    DegenerateChain { p01: f64, p11: f64 },

    /// A belief update was asked to condition on an impossible observation.
    #[error("impossible sensing observation: zero-probability belief denominator")]
    DegenerateBelief,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors raised by the numerical routines, as opposed to
    /// configuration or I/O problems.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Convergence { .. }
                | Error::Quadrature { .. }
                | Error::Bracketing { .. }
                | Error::DegenerateChain { .. }
                | Error::DegenerateBelief
        )
    }
}

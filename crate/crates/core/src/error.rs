use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by path sampling, integration and diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("capability error: {0}")]
    Capability(String),

    #[error("fixed-point iteration did not converge after {iterations} iterations (last residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("jump flow produced a non-finite state at substep {substep}")]
    Divergence { substep: usize },

    #[error("at t = {time}: {source}")]
    AtTime { time: f64, source: Box<Error> },

    #[error("vertex {index}: {source}")]
    AtVertex { index: usize, source: Box<Error> },

    #[error("path {index}: {source}")]
    AtPath { index: usize, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_time(self, time: f64) -> Self {
        Error::AtTime {
            time,
            source: Box::new(self),
        }
    }

    /// The innermost error, with location context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtTime { source, .. }
            | Error::AtVertex { source, .. }
            | Error::AtPath { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for solver non-convergence and jump-flow divergence.
    pub fn is_numerical(&self) -> bool {
        matches!(self.root(), Error::Solver { .. } | Error::Divergence { .. })
    }

    pub fn is_io(&self) -> bool {
        matches!(self.root(), Error::Io(_))
    }
}

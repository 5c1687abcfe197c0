use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// The CLI maps [`Error::is_parameter_error`] to exit code 2 and everything
/// else to exit code 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported parameters: {0}")]
    Unsupported(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {intervals} intervals")]
    NotConverged {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("Pfaffian requires an even dimension, got {0}")]
    OddDimension(usize),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn is_parameter_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Unsupported(_) | Error::OddDimension(_) | Error::Resource(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

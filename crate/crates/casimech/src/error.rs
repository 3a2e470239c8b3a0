use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input (configuration syntax, missing keys, bad grids).
    #[error("{0}")]
    Parse(String),
    /// Physically invalid or unsupported parameters; names the offending field.
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },
    /// Quadrature, integrator or truncation failure.
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid { field: field.into(), reason: reason.into() }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 1,
            Error::Invalid { .. } => 2,
            Error::Numerical(_) | Error::Io(_) => 3,
        }
    }
}

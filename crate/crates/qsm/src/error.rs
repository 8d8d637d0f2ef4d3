//! Crate-wide error type and the coarse categories used for CLI exit codes.

use thiserror::Error;

/// Coarse failure category, mapped to process exit codes by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad inputs: malformed files, invalid machines, out-of-range symbols.
    Validation,
    /// Numerical breakdown: degenerate spectra, non-convergence, singular factors.
    Numerical,
    /// An enumeration guard was exceeded (problem too large for exact evaluation).
    Guard,
}

impl ErrorCategory {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorCategory::Validation => 1,
            ErrorCategory::Numerical => 2,
            ErrorCategory::Guard => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ErrorCategory::Validation => "validation",
            ErrorCategory::Numerical => "numerical",
            ErrorCategory::Guard => "guard",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid machine: {0}")]
    InvalidMachine(String),

    #[error("symbol {symbol} out of range for alphabet of size {alphabet_size}")]
    SymbolOutOfRange { symbol: usize, alphabet_size: usize },

    #[error("past has probability zero under the model")]
    ZeroProbabilityPast,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed file {path}: {reason}")]
    MalformedFile { path: String, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("iteration did not converge: {0}")]
    NonConvergence(String),

    #[error("degenerate leading eigenvalue of the transfer map: {0}")]
    DegenerateSpectrum(String),

    #[error("singular fixed-point eigenmatrix: {0}")]
    SingularFixedPoint(String),

    #[error("completeness violated: residual {0:.3e}")]
    CompletenessViolated(f64),

    #[error("gradient undefined: {0}")]
    GradientUndefined(String),

    #[error("training failed: {0}")]
    TrainingFailed(String),

    #[error("enumeration guard exceeded: {0}")]
    GuardExceeded(String),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidMachine(_)
            | Error::SymbolOutOfRange { .. }
            | Error::ZeroProbabilityPast
            | Error::InvalidInput(_)
            | Error::InvalidConfig(_)
            | Error::MalformedFile { .. }
            | Error::Io { .. } => ErrorCategory::Validation,
            Error::NonConvergence(_)
            | Error::DegenerateSpectrum(_)
            | Error::SingularFixedPoint(_)
            | Error::CompletenessViolated(_)
            | Error::GradientUndefined(_)
            | Error::TrainingFailed(_) => ErrorCategory::Numerical,
            Error::GuardExceeded(_) => ErrorCategory::Guard,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

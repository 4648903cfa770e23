use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Configuration file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A configuration value violates a stated constraint.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A closed-form expression left its valid region.
    #[error("model-domain error in {expression}: {detail}")]
    ModelDomain { expression: String, detail: String },

    /// A queue would be unstable.
    #[error("unstable queue: {queue} utilization {rho:.6} must be below 1")]
    Unstable { queue: &'static str, rho: f64 },

    /// Grid shape or spacing mismatch.
    #[error("grid error: {0}")]
    Grid(String),

    /// Root solver was given a bracket without a sign change.
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {flo}, f(hi) = {fhi}")]
    Bracketing {
        lo: f64,
        hi: f64,
        flo: f64,
        fhi: f64,
    },

    /// Sample data are insufficient or degenerate.
    #[error("data error: {0}")]
    Data(String),

    /// Output could not be written.
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn model(expression: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::ModelDomain {
            expression: expression.into(),
            detail: detail.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } => 2,
            Error::Config(_) => 3,
            Error::Domain(_)
            | Error::ModelDomain { .. }
            | Error::Unstable { .. }
            | Error::Grid(_)
            | Error::Bracketing { .. } => 4,
            Error::Data(_) | Error::Io(_) => 5,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the register simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// The laser is not red-detuned from both D lines.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// A mask pattern does not fit the lens array.
    #[error("pattern does not fit the {rows}x{cols} lens array: {reason}")]
    PatternBounds { rows: usize, cols: usize, reason: String },

    /// Two per-site arrays disagree in length.
    #[error("shape mismatch: expected {expected} sites, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    /// The shift schedule failed validation.
    #[error("invalid shift schedule: {}", .0.join("; "))]
    InvalidSchedule(Vec<String>),

    /// A least-squares fit could not be set up.
    #[error("fit error: {0}")]
    Fit(String),

    /// Species data could not be read.
    #[error("species data: {0}")]
    Species(String),

    /// A scenario file failed to parse or validate; one entry per problem.
    #[error("invalid scenario:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

use std::fmt;

use thiserror::Error;

/// A single violated parameter constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {}", join(.0))]
    InvalidParams(Vec<Violation>),

    #[error("FWHM undefined: sensitivity is phase-independent")]
    FwhmUndefined,

    #[error("oracle needs at least 2 samples for variance estimation, got {0}")]
    TooFewSamples(usize),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    /// True if any violation concerns `field`.
    pub fn mentions(&self, field: &str) -> bool {
        match self {
            Error::InvalidParams(v) => v.iter().any(|x| x.field == field),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

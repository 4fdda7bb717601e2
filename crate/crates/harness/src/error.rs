use std::fmt;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const USAGE: u8 = 2;
    pub const PARSE: u8 = 3;
    pub const GUARANTEE: u8 = 4;
    pub const SOLVER: u8 = 5;
}

/// Position of a parse error, 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.line, self.column, self.message
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.as_deref().unwrap_or("<input>"))]
    Parse {
        path: Option<String>,
        source: ParseError,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("certified max regret {achieved} exceeds {bound}")]
    Guarantee { achieved: f64, bound: f64 },

    #[error(transparent)]
    Solver(#[from] anash_core::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Usage(_) => exit::USAGE,
            HarnessError::Parse { .. } | HarnessError::Io { .. } => exit::PARSE,
            HarnessError::Guarantee { .. } => exit::GUARANTEE,
            HarnessError::Solver(anash_core::Error::GuaranteeViolation { .. }) => exit::GUARANTEE,
            HarnessError::Solver(_) => exit::SOLVER,
        }
    }

    pub(crate) fn parse(path: Option<&str>, source: ParseError) -> Self {
        HarnessError::Parse {
            path: path.map(str::to_owned),
            source,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

use std::io;

/// Errors raised by matrix construction, I/O, solvers and analysis routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid solver configuration: {0}")]
    Config(String),

    #[error("matrix market parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0}")]
    Format(String),

    #[error("arithmetic domain error: {0}")]
    Domain(String),

    #[error("rank deficiency: {0}")]
    Rank(String),

    #[error("inconsistent system: {0}")]
    Inconsistent(String),

    #[error(
        "dimension {dim} exceeds the dense analysis threshold {limit}; use a desk-scale matrix"
    )]
    Size { dim: usize, limit: usize },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("eigen solver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True for errors caused by caller-supplied arguments or configuration,
    /// as opposed to numerical or domain failures.
    pub fn is_argument(&self) -> bool {
        matches!(self, Error::Argument(_) | Error::Config(_))
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

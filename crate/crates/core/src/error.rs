use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A nonzero difference projects to (nearly) zero, or two stored
    /// differences project to (nearly) the same value. Redraw the direction.
    #[error("degenerate projection direction")]
    DegenerateDirection,

    /// Every candidate collaboration was rejected. With a valid difference
    /// set this only happens when `c * k_min < k`.
    #[error("no surviving candidate in the collaboration search")]
    NoCandidate,

    #[error("search budget exceeded after {explored} explored nodes")]
    BudgetExceeded { explored: u64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

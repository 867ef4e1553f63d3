use thiserror::Error;

/// Library error type. Variants map onto the CLI exit-code contract:
/// `Usage` exits 2, everything else exits 1.
#[derive(Error, Debug)]
pub enum Error {
    /// A caller-supplied value violates a precondition (wrong length, out of range).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A mathematically undefined request (log at the cut locus, empty ball, 0/0 ratio).
    #[error("domain error: {0}")]
    Domain(String),

    /// Bad run configuration: unknown check name, grid too coarse for the cutoff, etc.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    /// CLI exit code for this error: misuse (bad flags, unknown names,
    /// infeasible configs) exits 2, every runtime failure exits 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            _ => 1,
        }
    }
}

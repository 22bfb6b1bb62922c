use thiserror::Error;

/// Failure modes shared by every layer of the engine.
///
/// The variants map one-to-one onto the CLI exit-code contract
/// (see [`Error::exit_code`]).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precision error: {0}")]
    Precision(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("no certificate: {0}")]
    NoCertificate(String),
    #[error("orbit point {step} falls inside the uncertainty band of the flip interval boundary")]
    BoundaryAmbiguity { step: u64 },
    #[error("stage {k}: {source}")]
    Stage { k: u32, source: Box<Error> },
    #[error("usage error: {0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn precision(msg: impl Into<String>) -> Self {
        Error::Precision(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn at_stage(self, k: u32) -> Self {
        Error::Stage { k, source: Box::new(self) }
    }

    /// Process exit code: 1 verdict failure (not an error), 2 usage,
    /// 3 precision, 4 resource.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Domain(_) => 2,
            Error::Precision(_) | Error::BoundaryAmbiguity { .. } | Error::NoCertificate(_) => 3,
            Error::Resource(_) => 4,
            Error::Io(_) => 1,
            Error::Stage { source, .. } => source.exit_code(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

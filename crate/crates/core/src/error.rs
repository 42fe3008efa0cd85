use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what}: m = {requested} exceeds the cap of {cap}")]
    Capacity {
        what: &'static str,
        requested: u32,
        cap: u32,
    },

    #[error(
        "slice at step {step} is not admissible: {strict} leaves lie strictly above alpha but only {a} may be black; use a finer step bound"
    )]
    Admissibility { step: usize, strict: usize, a: usize },

    #[error("malformed sweepout trace: {0}")]
    MalformedTrace(String),

    #[error("certificate check failed: {0}")]
    CertificateViolation(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }
}

use thiserror::Error;

/// Errors raised by the estimation library.
///
/// The variants are grouped the way callers need to react to them: bad
/// configuration, inputs that cannot support the requested computation, and
/// numerical results that could not be certified to the requested precision.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("boundary error: {0}")]
    Boundary(String),

    #[error("scale depth error: requested scale {requested} but at most {max_feasible} is feasible for {len} samples")]
    ScaleDepth {
        requested: usize,
        max_feasible: usize,
        len: usize,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("precision error: {msg}")]
    Precision { msg: String, suggestion: Option<usize> },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn boundary(msg: impl Into<String>) -> Self {
        Error::Boundary(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

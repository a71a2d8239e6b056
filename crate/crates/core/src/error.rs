use alloc::string::String;

/// Errors raised by body construction and the numerical kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeomError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported body: {0}")]
    UnsupportedBody(String),
    #[error("degenerate body: {0}")]
    Degenerate(String),
    #[error("sampler efficiency: {0}")]
    Efficiency(String),
    #[error("evaluation produced a non-finite value: {0}")]
    Evaluation(String),
}

pub type Result<T> = core::result::Result<T, GeomError>;

macro_rules! bail {
    ($variant:ident, $($arg:tt)*) => {
        return Err($crate::error::GeomError::$variant(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;

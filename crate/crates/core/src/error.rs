use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A point does not lie in the closed domain of the model.
    #[error("point outside the domain: {0}")]
    Domain(String),
    /// An operation was called outside its precondition (for example the
    /// inward normal at an interior point).
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Inconsistent or incomplete configuration.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($variant:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$variant(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;

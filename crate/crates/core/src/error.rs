use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("variable `{0}` has zero variance and cannot be standardized")]
    ConstantColumn(String),

    #[error("unit `{unit}` has {len} time points; at least {needed} are required")]
    UnitTooShort { unit: String, len: usize, needed: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("standardization statistics of the data do not match the model")]
    StatsMismatch,

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("bin {bin} is empty")]
    EmptyBin { bin: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("non-finite training loss at epoch {epoch}, batch {batch}")]
    Diverged { epoch: usize, batch: usize },

    #[error("zero variance in {0}; correlation undefined")]
    ZeroVariance(&'static str),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}

use alloc::string::String;

/// Errors raised by model construction, validation and solving.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid scenario tree: {0}")]
    InvalidTree(String),
    #[error("malformed model: {0}")]
    MalformedModel(String),
    #[error("enumeration cap exceeded: {needed} assignments > cap {cap}")]
    EnumerationCap { needed: u128, cap: u128 },
    #[error("model infeasible: {0}")]
    Infeasible(String),
    #[error("node limit reached: {0}")]
    NodeLimit(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = core::result::Result<T, Error>;

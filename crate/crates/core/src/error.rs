use thiserror::Error;

/// Errors raised by the machine simulator, the sequential kernels and the
/// selection algorithms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("rank {k} out of range 1..={n}")]
    Rank { k: usize, n: usize },

    #[error("empty input")]
    Empty,

    #[error("processor index {index} out of range for p = {p}")]
    ProcessorIndex { index: usize, p: usize },

    #[error("value {0} is not a member of the support set")]
    SupportViolation(String),

    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

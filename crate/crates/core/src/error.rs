use alloc::string::String;

/// Errors reported by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Input would need more memory or time than the operation supports.
    #[error("capacity exceeded: {what} (limit {limit})")]
    Capacity { what: &'static str, limit: u64 },
    /// A numeric argument lies outside the range where the quantity is defined.
    #[error("out of range: {0}")]
    Range(String),
    /// Argument outside the mathematical domain (e.g. a non-positive mean).
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid vertex: {0}")]
    InvalidVertex(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    /// Some vertex was never infected, so no cover time exists.
    #[error("incomplete coverage: {uninfected} vertices never infected")]
    IncompleteCoverage { uninfected: usize },
    #[error("empty sample")]
    EmptySample,
}

impl Error {
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }
}

pub type Result<T> = core::result::Result<T, Error>;

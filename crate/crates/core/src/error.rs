use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("formula syntax error at position {position}: {message}")]
    FormulaSyntax { position: usize, message: String },

    #[error("line {line}: distribution sums to {sum}")]
    DistributionSum { line: usize, sum: String },

    #[error("line {line}: undeclared state `{state}`")]
    UndeclaredState { line: usize, state: String },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("threshold {0} outside [0,1]")]
    Threshold(String),

    #[error("depth undefined for until")]
    DepthOfUntil,

    #[error("unsupported fragment: {0}")]
    Fragment(String),

    #[error("resource cap `{cap}` exceeded (limit {limit})")]
    ResourceCap { cap: &'static str, limit: usize },

    #[error("invalid query: {0}")]
    Query(String),

    #[error("formula failed verification: {0}")]
    Unverified(String),

    #[error("classes `{0}` and `{1}` cannot be separated under the budget")]
    Inseparable(String, String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn is_resource_cap(&self) -> bool {
        matches!(self, Error::ResourceCap { .. })
    }
}

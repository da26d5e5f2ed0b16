use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weight sequence: {0}")]
    InvalidSequence(String),

    #[error("invalid order profile: {0}")]
    InvalidProfile(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("truncation order {order} exceeds prefix length {prefix}")]
    OrderExceedsPrefix { order: usize, prefix: usize },

    #[error("m must be positive, got {0}")]
    NonPositiveM(f64),

    #[error("not summable: {0}")]
    NotSummable(String),

    #[error("refinement budget exhausted: d reached {d} without meeting rtol {rtol:e}")]
    BudgetExceeded { d: usize, rtol: f64 },

    #[error("order profile must be FactorialPower(1) for this operation")]
    NonFactorialProfile,

    #[error("tail mass is zero at index {0} while later weights are positive")]
    ZeroTail(usize),

    #[error("invalid multi-index: {0}")]
    InvalidMultiIndex(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("spec file error at `{path}`: {message}")]
    SpecParse { path: String, message: String },
}

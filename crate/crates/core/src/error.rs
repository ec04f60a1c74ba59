use thiserror::Error;

/// Errors raised by the optimizers, schedules and estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("partition ratio {0} is not a power of two >= 2")]
    NotPowerOfTwo(u64),

    #[error("point lies outside the unit cube")]
    OutsideDomain,

    #[error("point has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("edge-length schedule: {0}")]
    Schedule(String),

    #[error("sample-count argument {0} must lie in (0, 1)")]
    SampleCountDomain(f64),

    #[error("first batch needs {needed} pulls but the budget is {budget}")]
    InfeasibleFirstBatch { needed: u64, budget: u64 },

    #[error("horizon too small for k-mode: {0}")]
    HorizonTooSmall(String),

    #[error("bound degenerates: {0}")]
    DegenerateBound(String),

    #[error("degenerate cube: f_max equals f_min ({0})")]
    DegenerateCube(f64),

    #[error("need >= {needed} grid points, got {got}")]
    GridTooSmall { needed: usize, got: usize },

    #[error("need >= {needed} seeds, got {got}")]
    TooFewSeeds { needed: usize, got: usize },

    #[error("objective has no dimension profile")]
    MissingProfile,

    #[error("unknown objective `{0}`")]
    UnknownObjective(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

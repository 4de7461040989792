use thiserror::Error;

/// Errors raised while building instances, planning, or running episodes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IdpError {
    #[error("invalid model: {0}")]
    Validation(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("invalid incentive ranges: {0}")]
    InvalidRanges(String),

    #[error("no prior mass inside the current incentive ranges")]
    EmptySupport,

    #[error("observation contradicts established bounds for action a_{action}")]
    InconsistentObservation { action: usize },

    #[error("horizon must be at least 1")]
    InvalidHorizon,

    #[error("finite-horizon planning requires discount = 1 (got {0})")]
    DiscountedFiniteUnsupported(f64),

    #[error("infinite-horizon planning requires discount < 1")]
    UndiscountedInfinite,

    #[error("policy reached a node missing from the solved table")]
    UnreachableNode,

    #[error("instance too large for brute-force evaluation ({size} > {limit})")]
    InstanceTooLarge { size: u128, limit: u128 },
}

pub type Result<T, E = IdpError> = std::result::Result<T, E>;

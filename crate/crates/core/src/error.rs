use thiserror::Error;

/// Errors raised by the simulation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("{what} is rank deficient: numerical rank {rank}, expected {expected}")]
    RankDeficient {
        what: &'static str,
        rank: usize,
        expected: usize,
    },

    #[error("sample covariance needs at least {needed} frames, got {got}")]
    InsufficientFrames { needed: usize, got: usize },

    #[error("{mode} covariance requires {what}")]
    MissingInput {
        mode: &'static str,
        what: &'static str,
    },

    #[error("receive vector is zero")]
    ZeroVector,

    #[error("frame stream is empty")]
    EmptyStream,

    #[error("interference-free regime: no out-of-cell gain for user {user}")]
    NoInterference { user: usize },

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

pub type Result<T> = std::result::Result<T, Error>;

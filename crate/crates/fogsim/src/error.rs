use thiserror::Error;

/// Errors surfaced by the simulator and its agents.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or unresolvable configuration (unknown profile, bad
    /// probability vector, dangling FN index, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller violated an operation precondition, e.g. serving at an
    /// FN outside the feasible set.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Training produced a non-finite loss or gradient.
    #[error("training fault: {0}")]
    Training(String),

    /// A policy snapshot file failed to decode.
    #[error("snapshot error: {0}")]
    Snapshot(String),

    /// The requested exact solve would enumerate too many states.
    #[error("state space too large: estimated {estimated} states exceeds limit {limit}")]
    StateSpaceTooLarge { estimated: u64, limit: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

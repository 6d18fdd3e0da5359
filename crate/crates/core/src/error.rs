use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("undefined input: {0}")]
    UndefinedInput(String),
    #[error("unsuitable gap: length {0} < 2")]
    UnsuitableGap(String),
    #[error("invalid placement at step {step}: {reason}")]
    InvalidPlacement { step: usize, reason: String },
    #[error("invalid game configuration: {0}")]
    InvalidConfig(String),
    #[error("adversary stuck at step {step}: {reason}")]
    AdversaryStuck { step: usize, reason: String },
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("unsupported regime: {0}")]
    Unsupported(String),
    #[error("degenerate segment of size {0}")]
    DegenerateSegment(u64),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("busy region at step {step} is not a single segment ({pieces} pieces)")]
    NotLazy { step: usize, pieces: usize },
    #[error("structural error: {0}")]
    Structural(String),
}

pub type Result<T, E = GameError> = std::result::Result<T, E>;

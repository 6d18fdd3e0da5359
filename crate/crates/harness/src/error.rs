use labeling_core::GameError;
use thiserror::Error;

/// Process exit codes of the `labeling` binary.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const STUCK: i32 = 3;
    pub const CAPACITY: i32 = 4;
    pub const INVALID_PLACEMENT: i32 = 5;
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad record: {0}")]
    Record(String),
}

impl HarnessError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => exit::CONFIG,
            HarnessError::Game(e) => match e {
                GameError::AdversaryStuck { .. } => exit::STUCK,
                GameError::Capacity(_) => exit::CAPACITY,
                GameError::InvalidPlacement { .. } => exit::INVALID_PLACEMENT,
                GameError::InvalidConfig(_)
                | GameError::Parameter(_)
                | GameError::Infeasible(_)
                | GameError::Unsupported(_) => exit::CONFIG,
                _ => exit::OTHER,
            },
            _ => exit::OTHER,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

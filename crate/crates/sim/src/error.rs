use thiserror::Error;

pub type SimResult<T> = Result<T, SimError>;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] rcds_core::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl SimError {
    pub fn config(message: impl Into<String>) -> Self {
        SimError::Config(message.into())
    }

    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        SimError::Parse {
            line,
            message: message.into(),
        }
    }

    /// Process exit code: 3 for an abort guard, 2 for bad configuration or
    /// input, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Core(e) if !e.is_config_error() => 3,
            SimError::Core(_) | SimError::Config(_) | SimError::Parse { .. } => 2,
            SimError::Io(_) | SimError::Csv(_) => 1,
        }
    }
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad or unreadable configuration; exit code 2.
    #[error("configuration error: {0}")]
    Config(String),
    /// A stage of an experiment failed; exit code 1.
    #[error("experiment failed: {0}")]
    Experiment(#[from] nufrecon::ReconError),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

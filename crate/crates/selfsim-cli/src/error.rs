use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Solver(#[from] selfsim::Error),

    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("verification failed: {}", .0.join(", "))]
    Verify(Vec<String>),

    /// Sweep where no row converged; the table has been written.
    #[error("no σ in the sweep converged")]
    NothingConverged,
}

impl CliError {
    /// 1 = configuration, 2 = numerical failure, 3 = verification failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Solver(e) if e.is_config() => 1,
            CliError::Solver(_) | CliError::NothingConverged => 2,
            CliError::Verify(_) => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Data(String),

    #[error("{0}")]
    Convergence(String),

    #[error(transparent)]
    Core(#[from] poincare_linear::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// 2 for usage errors, 3 for bad data, 4 for runs that did not converge.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Data(_) => 3,
            CliError::Convergence(_) => 4,
            CliError::Core(e) if e.is_validation() => 3,
            CliError::Json(e) if e.is_data() || e.is_syntax() || e.is_eof() => 3,
            CliError::Csv(_) => 3,
            _ => 2,
        }
    }
}

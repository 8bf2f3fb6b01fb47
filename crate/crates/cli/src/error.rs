use std::process::ExitCode;

use dglr_core::DglError;
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Budget(String),
}

impl From<DglError> for CliError {
    fn from(e: DglError) -> Self {
        match e {
            DglError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Input(_) => "input",
            CliError::Budget(_) => "budget-exceeded",
        }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::Budget(_) => 3,
        }
    }

    /// Prints the error as one JSON object on stdout and returns its exit code.
    pub fn report(&self) -> ExitCode {
        crate::say(&json!({ "error": self.kind(), "message": self.to_string() }));
        ExitCode::from(self.code())
    }
}

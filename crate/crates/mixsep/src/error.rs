use std::process::ExitCode;

use mixsep_core::Error as CoreError;

/// Failure carrying the process exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        CliError::Numerical(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(2),
            CliError::Numerical(_) => ExitCode::from(3),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NoElbow | CoreError::ZeroSignal | CoreError::NonInvertible => CliError::numerical(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::input(e.to_string())
    }
}

use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    BadInput(String),
    #[error("{0}")]
    Numeric(String),
    /// A checked inequality failed; the report has already been written.
    #[error("inequality violated: {0}")]
    Violated(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::BadInput(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Violated(_) => 4,
        })
    }
}

impl From<gaussflow::Error> for CliError {
    fn from(e: gaussflow::Error) -> Self {
        use gaussflow::Error as E;
        match e {
            E::Numeric(_) | E::SingularCone { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::BadInput(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::BadInput(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

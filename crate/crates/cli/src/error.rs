use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid or incomplete flags.
    #[error("{0}")]
    Usage(String),

    /// A numeric, input or output failure.
    #[error(transparent)]
    Core(#[from] pitman_core::Error),

    /// `rate --check` found the report outside its acceptance bands.
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(pitman_core::Error::Io(e))
    }
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Core(_) => ExitCode::from(1),
            CliError::Usage(_) => ExitCode::from(2),
            CliError::CheckFailed(_) => ExitCode::from(3),
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

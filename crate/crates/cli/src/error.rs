use std::process::ExitCode;

use thiserror::Error;

/// Failure classes, each with its own exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: unreadable files, malformed or inconsistent configuration.
    #[error("validation failed: {0}")]
    Validation(String),
    /// A trajectory or transformation hit a non-generic configuration.
    #[error("genericity abort: {0}")]
    Genericity(String),
    /// A computed residual exceeded the requested tolerance but not the default one.
    #[error("tolerance not reached: {0}")]
    Tolerance(String),
    /// An invariant was violated beyond numerical noise.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Invariant(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Genericity(_) => 3,
            CliError::Tolerance(_) => 4,
        })
    }

    /// Classifies a library error raised while computing (not while loading).
    pub fn from_run(e: isomono::Error) -> Self {
        match e {
            e if e.is_genericity() => CliError::Genericity(e.to_string()),
            e @ (isomono::Error::Input(_) | isomono::Error::Dimension(_) | isomono::Error::SingularLeading { .. }) => {
                CliError::Validation(e.to_string())
            }
            e => CliError::Invariant(e.to_string()),
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Validation(format!("{}: {e}", path.display()))
    }
}

pub type CliResult<T> = Result<T, CliError>;

//! Errors and process exit codes.

use fermiqit::FermiError;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_SSR: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_PARSE: i32 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Ssr(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Core(#[from] FermiError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Io(_) => EXIT_FAILURE,
            CliError::Ssr(_) => EXIT_SSR,
            CliError::Verification(_) => EXIT_VERIFY,
            CliError::Core(e) => match e {
                FermiError::NotSsr(_) | FermiError::MixedBlockForm { .. } => EXIT_SSR,
                FermiError::NotPositive { .. }
                | FermiError::NotUnitary { .. }
                | FermiError::NotTracePreserving { .. }
                | FermiError::NotContractive { .. } => EXIT_VERIFY,
                FermiError::InvalidPattern(_) => EXIT_PARSE,
                _ => EXIT_FAILURE,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Parse("x".into()).exit_code(), 64);
        assert_eq!(CliError::from(FermiError::NotSsr("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(FermiError::NotTracePreserving { deviation: 1.0 }).exit_code(), 3);
        assert_eq!(CliError::from(FermiError::OverlappingModes).exit_code(), 1);
    }
}

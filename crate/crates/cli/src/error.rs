use std::path::PathBuf;

use crate::schema::ParseError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const BOUNDARY_ONLY: i32 = 4;
    pub const NON_CONVERGENCE: i32 = 5;
    pub const UNSUPPORTED_REPRESENTATION: i32 = 6;
    pub const ORACLE_UNSUPPORTED: i32 = 7;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{}: parse error: {source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] gmaxent_core::Error),
    #[error("oracle cannot handle this instance: {0}")]
    OracleUnsupported(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use gmaxent_core::Error as E;
        match self {
            CliError::Read { .. } | CliError::Parse { .. } => exit::PARSE,
            CliError::Write { .. } | CliError::Invalid(_) => exit::VALIDATION,
            CliError::OracleUnsupported(_) => exit::ORACLE_UNSUPPORTED,
            CliError::Core(e) => match e {
                E::UnsupportedRepresentation(_) | E::Unsupported(_) => exit::UNSUPPORTED_REPRESENTATION,
                E::NumericalFailure(_) | E::Overflow(_) => exit::NON_CONVERGENCE,
                _ => exit::VALIDATION,
            },
        }
    }
}

use pogg_core::GameError;
use thiserror::Error;

/// Exit status table, also shown in `--help`.
pub const EXIT_CODES: &str = "\
Exit status:
  0  success
  2  invalid input: flags, configuration values, unmet preconditions
  3  numerical failure: vacuous bound, no critical pair, no pure region,
     unreachable information set
  4  I/O failure: unreadable config file, unwritable output
  5  enumeration cap exceeded";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("enumeration cap: {0}")]
    Cap(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
            CliError::Cap(_) => 5,
        }
    }
}

impl From<GameError> for CliError {
    fn from(e: GameError) -> Self {
        let msg = e.to_string();
        match e {
            GameError::InvalidConfig { .. }
            | GameError::InvalidPosition { .. }
            | GameError::InconsistentSample { .. }
            | GameError::OutOfRange { .. }
            | GameError::AsymmetricNotSupported { .. }
            | GameError::Precondition { .. } => CliError::Validation(msg),
            GameError::VacuousBound { .. }
            | GameError::NoCriticalPair { .. }
            | GameError::UnreachableInfoSet(_)
            | GameError::NoPureRegion => CliError::Numerical(msg),
            GameError::EnumerationCap { .. } => CliError::Cap(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

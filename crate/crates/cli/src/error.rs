use basinctl_core::control::ControlSetupError;
use basinctl_core::equilibria::SelectorError;
use basinctl_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("computation failed: {0}")]
    Computation(String),
    #[error("{0}")]
    Selector(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Computation(_) => 3,
            CliError::Selector(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_)
            | Error::DimensionMismatch { .. }
            | Error::ParamDomain { .. } => CliError::Config(e.to_string()),
            other => CliError::Computation(other.to_string()),
        }
    }
}

impl From<SelectorError> for CliError {
    fn from(e: SelectorError) -> Self {
        CliError::Selector(e.to_string())
    }
}

impl From<ControlSetupError> for CliError {
    fn from(e: ControlSetupError) -> Self {
        match e {
            ControlSetupError::Selector(s) => s.into(),
            ControlSetupError::Invalid(e) => e.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Computation(format!("output: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Computation(format!("output: {e}"))
    }
}

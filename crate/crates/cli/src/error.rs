use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] dln_core::CoreError),

    #[error(transparent)]
    Spectral(#[from] dln_spectral::SpectralError),

    #[error(transparent)]
    Stepper(#[from] dln_stepper::StepperError),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass = 0,
    Violation = 1,
    ConfigError = 2,
    SolverFailure = 3,
}

impl Status {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn from_violations(n: usize) -> Self {
        if n == 0 {
            Self::Pass
        } else {
            Self::Violation
        }
    }
}

impl CliError {
    pub fn status(&self) -> Status {
        match self {
            CliError::Stepper(e) if e.is_solver_failure() => Status::SolverFailure,
            _ => Status::ConfigError,
        }
    }
}

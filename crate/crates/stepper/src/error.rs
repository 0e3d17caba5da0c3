use thiserror::Error;

#[derive(Debug, Error)]
pub enum StepperError {
    #[error("stage solver did not converge in {iters} iterations (relative residual {residual:e}) at step {step}")]
    NonConvergence {
        step: usize,
        iters: usize,
        residual: f64,
    },

    #[error("blow-up at step {step}: ||u||^2 = {energy:e} exceeds ceiling {ceiling:e}")]
    BlowUp {
        step: usize,
        energy: f64,
        ceiling: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] dln_core::CoreError),

    #[error(transparent)]
    Spectral(#[from] dln_spectral::SpectralError),
}

impl StepperError {
    /// True for failures of the numerical solve rather than of the inputs.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Self::NonConvergence { .. } | Self::BlowUp { .. })
    }
}

pub type Result<T> = std::result::Result<T, StepperError>;

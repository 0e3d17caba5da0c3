use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("theta = {0} is outside the admissible open interval (0, 1)")]
    ThetaOutOfRange(f64),

    #[error("parameter `{name}` = {value} must be {requirement}")]
    Domain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error(
        "time step {dt} is not admissible: it must lie strictly below C_dt = {max_dt} \
         (theta = {theta}, nu = {nu}, lambda1 = {lambda1})"
    )]
    InadmissibleTimestep {
        dt: f64,
        max_dt: f64,
        theta: f64,
        nu: f64,
        lambda1: f64,
    },

    #[error("{which} discriminant is negative ({value:e}); dt is too close to the admissibility edge for working precision")]
    NegativeDiscriminant { which: Discriminant, value: f64 },

    #[error("window length r = {r} must exceed 5*C_dt = {min}")]
    WindowTooShort { r: f64, min: f64 },

    #[error("sequence `{name}` has length {len}, need at least {needed}")]
    SequenceLength {
        name: &'static str,
        len: usize,
        needed: usize,
    },

    #[error("invalid index window: {0}")]
    IndexWindow(String),
}

/// The two discriminants of the H-matrix construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Discriminant {
    /// `x - 4E`, governs the split of `b` and `a + c`.
    Outer,
    /// Governs the split of `a` and `c`.
    Inner,
}

impl std::fmt::Display for Discriminant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Discriminant::Outer => f.write_str("outer"),
            Discriminant::Inner => f.write_str("inner"),
        }
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CoreError::Domain {
            name,
            value,
            requirement: "finite and > 0",
        })
    }
}

pub(crate) fn require_nonnegative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(CoreError::Domain {
            name,
            value,
            requirement: "finite and >= 0",
        })
    }
}

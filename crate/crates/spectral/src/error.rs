use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("grid size n = {0} must be a power of two and at least 8")]
    GridSize(usize),

    #[error("period L = {0} must be finite and positive")]
    Period(f64),

    #[error("fields live on different grids ({left_n}x{left_n}, L={left_l} vs {right_n}x{right_n}, L={right_l})")]
    GridMismatch {
        left_n: usize,
        left_l: f64,
        right_n: usize,
        right_l: f64,
    },

    #[error("forcing mode ({kx}, {ky}) has zero wavenumber; forcing must have zero mean")]
    MeanForcing { kx: i64, ky: i64 },

    #[error("forcing mode ({kx}, {ky}) lies outside the dealiased band |k_i| <= {cutoff}")]
    ForcingOutOfBand { kx: i64, ky: i64, cutoff: usize },

    #[error("parameter `{name}` = {value} must be {requirement}")]
    Domain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] dln_core::CoreError),
}

pub type Result<T> = std::result::Result<T, SpectralError>;

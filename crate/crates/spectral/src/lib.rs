//! Fourier discretization of divergence-free velocity fields on the
//! periodic torus `[0, L)^2`.
//!
//! The pressure is eliminated by the Leray projection; the advection term
//! is dealiased with the 2/3 rule so that the discrete trilinear form is
//! skew-symmetric up to roundoff.

pub mod error;
pub mod field;
pub mod forcing;
pub mod grid;
pub mod init;
pub mod io;
pub mod transform;

pub use error::{Result, SpectralError};
pub use field::{leray_project, norms, Norms, RawField, VelocityField};
pub use forcing::{ForcingMode, ForcingSpec, Modulation};
pub use grid::{stokes_lambda1, TorusGrid};
pub use init::{random_field, taylor_green, taylor_green_at};
pub use transform::{PhysicalField, SpectralOps};

/// Laplacian / H2-seminorm equivalence constant on the zero-mean torus:
/// `||D^2 u|| = ||Delta u||` exactly in Fourier space.
pub const C_OMEGA_TORUS: f64 = 1.0;

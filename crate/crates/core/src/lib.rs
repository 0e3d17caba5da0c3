//! Core of the DLN toolkit: method coefficients, G-stability identities,
//! H-matrix stability certificates, long-time bound constants and the two
//! discrete Grönwall lemmas.
//!
//! Everything here is a pure function of its inputs.

pub mod bounds;
pub mod certificate;
pub mod coefficients;
pub mod compensated;
pub mod error;
pub mod gronwall;
pub mod identities;
pub mod space;

pub use bounds::{
    h1_constants, kappa_constants, l2_constants, uniform_timestep_limit, H1Constants, H1Inputs,
    Kappas, L2Constants,
};
pub use certificate::{
    bound_flags, build_certificate, max_timestep, system_residuals, BoundFlags, CertificateInput,
    HCertificate, SystemResiduals,
};
pub use coefficients::{h11_floor, h22_floor, make_coefficients, DlnCoefficients, ThetaParam};
pub use error::{CoreError, Discriminant, Result};
pub use gronwall::{gronwall_bound, uniform_gronwall_bound, GronwallInput, UniformWindow};
pub use identities::{
    combine_beta, g_norm_sq, g_norm_sq_from_norms, g_stability_residual, identity1_residual,
    identity2_residual, StateTriple,
};
pub use space::InnerProductSpace;

//! Initial-condition presets.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SpectralError};
use crate::field::{leray_project, RawField, VelocityField};
use crate::grid::TorusGrid;

/// `A (sin(k0 x) cos(k0 y), -cos(k0 x) sin(k0 y))`, `k0 = 2 pi / L`.
///
/// Its advection term is a pure gradient, so under the projected dynamics
/// each coefficient decays exactly like `exp(-2 nu k0^2 t)`.
pub fn taylor_green(grid: TorusGrid, amplitude: f64) -> VelocityField {
    let mut raw = RawField::zeros(grid);
    let n = grid.n();
    let q = Complex64::new(0.0, 0.25 * amplitude);
    // sin a cos b = (e^{i(a+b)} + e^{i(a-b)} - c.c.) / (4i)
    for (sx, sy) in [(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)] {
        let idx = grid.index_of(sy) * n + grid.index_of(sx);
        // u: sin(x) cos(y) -> -i/4 * sign(kx)
        raw.u_hat[idx] = -q * sx as f64;
        // v: -cos(x) sin(y) -> +i/4 * sign(ky)
        raw.v_hat[idx] = q * sy as f64;
    }
    leray_project(&raw)
}

/// Analytic Taylor–Green state at time `t` for viscosity `nu`.
pub fn taylor_green_at(grid: TorusGrid, amplitude: f64, nu: f64, t: f64) -> VelocityField {
    let decay = (-2.0 * nu * grid.stokes_lambda1() * t).exp();
    taylor_green(grid, amplitude * decay)
}

/// Seeded random field with energy spectrum `~ |k|^-4` for `0 < |k| <= n/4`
/// (integer wavenumber units), Leray-projected and rescaled to `||u|| = target_l2`.
///
/// Each in-band mode draws real and imaginary parts uniformly from
/// `[-1, 1]` (ChaCha8, fixed visiting order), scaled by `|k|^-2`.
pub fn random_field(grid: TorusGrid, seed: u64, target_l2: f64) -> Result<VelocityField> {
    if !(target_l2.is_finite() && target_l2 >= 0.0) {
        return Err(SpectralError::Domain {
            name: "target_l2",
            value: target_l2,
            requirement: "finite and >= 0",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n();
    let kmax = (n / 4) as f64;
    let mut raw = RawField::zeros(grid);
    for idx in 0..grid.len() {
        let kx = grid.wavenumber(idx % n) as f64;
        let ky = grid.wavenumber(idx / n) as f64;
        let k = (kx * kx + ky * ky).sqrt();
        let mut draw = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let (a, b) = (draw(), draw());
        if k == 0.0 || k > kmax {
            continue;
        }
        let s = k.powi(-2);
        raw.u_hat[idx] = a * s;
        raw.v_hat[idx] = b * s;
    }
    let u = leray_project(&raw);
    let norm = u.norms().l2_sq.sqrt();
    Ok(if norm == 0.0 {
        u
    } else {
        u.scaled(target_l2 / norm)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn taylor_green_norms() {
        let g = TorusGrid::standard(16).unwrap();
        let u = taylor_green(g, 1.0);
        let n = u.norms();
        assert!((n.l2_sq - 2.0 * PI * PI).abs() < 1e-12);
        assert!((n.grad_sq / n.l2_sq - 2.0).abs() < 1e-14);
        assert_eq!(u.relative_divergence(), 0.0);
    }

    #[test]
    fn random_field_is_reproducible() {
        let g = TorusGrid::standard(32).unwrap();
        let a = random_field(g, 42, 3.0).unwrap();
        let b = random_field(g, 42, 3.0).unwrap();
        let c = random_field(g, 43, 3.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((a.norms().l2_sq.sqrt() - 3.0).abs() < 1e-12);
        assert!(a.relative_divergence() < 1e-14);
        assert!(a.symmetry_defect() == 0.0);
    }
}

use dln_core::{CoreError, InnerProductSpace};
use num_complex::Complex64;

use crate::error::Result;
use crate::grid::TorusGrid;

/// An arbitrary vector field in spectral form (may carry divergence, a mean
/// or Nyquist content). Coefficients use the `1/n^2` forward normalization,
/// so `u(x) = sum_k u_hat(k) exp(i k.x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawField {
    pub grid: TorusGrid,
    pub u_hat: Vec<Complex64>,
    pub v_hat: Vec<Complex64>,
}

impl RawField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            u_hat: vec![Complex64::new(0.0, 0.0); grid.len()],
            v_hat: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Largest `|k . u_hat(k)|` over all modes.
    pub fn max_divergence(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| {
                let (kx, ky) = self.grid.wave_vector(i);
                (self.u_hat[i] * kx + self.v_hat[i] * ky).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Divergence-free, zero-mean, real-valued velocity field.
///
/// Only produced by [`leray_project`] or by operations that preserve the
/// three properties (linear combinations, the Stokes solve, projected products).
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    grid: TorusGrid,
    u_hat: Vec<Complex64>,
    v_hat: Vec<Complex64>,
}

/// Squared `L2`, `H1`-seminorm and `H2`-seminorm, via Parseval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2_sq: f64,
    pub grad_sq: f64,
    pub lap_sq: f64,
}

impl VelocityField {
    pub fn zeros(grid: TorusGrid) -> Self {
        let r = RawField::zeros(grid);
        Self {
            grid,
            u_hat: r.u_hat,
            v_hat: r.v_hat,
        }
    }

    /// Caller guarantees the invariants.
    pub(crate) fn from_parts(grid: TorusGrid, u_hat: Vec<Complex64>, v_hat: Vec<Complex64>) -> Self {
        debug_assert_eq!(u_hat.len(), grid.len());
        debug_assert_eq!(v_hat.len(), grid.len());
        Self { grid, u_hat, v_hat }
    }

    #[inline]
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    #[inline]
    pub fn u_hat(&self) -> &[Complex64] {
        &self.u_hat
    }

    #[inline]
    pub fn v_hat(&self) -> &[Complex64] {
        &self.v_hat
    }

    pub fn to_raw(&self) -> RawField {
        RawField {
            grid: self.grid,
            u_hat: self.u_hat.clone(),
            v_hat: self.v_hat.clone(),
        }
    }

    pub fn norms(&self) -> Norms {
        let mut l2 = 0.0;
        let mut g = 0.0;
        let mut lap = 0.0;
        for i in 0..self.grid.len() {
            let (kx, ky) = self.grid.wave_vector(i);
            let k2 = kx * kx + ky * ky;
            let a = self.u_hat[i].norm_sqr() + self.v_hat[i].norm_sqr();
            l2 += a;
            g += k2 * a;
            lap += k2 * k2 * a;
        }
        let area = self.grid.area();
        Norms {
            l2_sq: area * l2,
            grad_sq: area * g,
            lap_sq: area * lap,
        }
    }

    /// `(grad u, grad w)`
    pub fn grad_dot(&self, other: &Self) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        let mut s = 0.0;
        for i in 0..self.grid.len() {
            let (kx, ky) = self.grid.wave_vector(i);
            let k2 = kx * kx + ky * ky;
            s += k2
                * ((self.u_hat[i] * other.u_hat[i].conj()).re
                    + (self.v_hat[i] * other.v_hat[i].conj()).re);
        }
        Ok(self.grid.area() * s)
    }

    /// `max |k . u_hat| / max |k| |u_hat|`; zero for an exactly solenoidal field.
    pub fn relative_divergence(&self) -> f64 {
        let mut div = 0.0_f64;
        let mut mag = 0.0_f64;
        for i in 0..self.grid.len() {
            let (kx, ky) = self.grid.wave_vector(i);
            div = div.max((self.u_hat[i] * kx + self.v_hat[i] * ky).norm());
            let k = (kx * kx + ky * ky).sqrt();
            mag = mag.max(k * (self.u_hat[i].norm_sqr() + self.v_hat[i].norm_sqr()).sqrt());
        }
        if mag == 0.0 {
            0.0
        } else {
            div / mag
        }
    }

    pub fn mean(&self) -> (Complex64, Complex64) {
        (self.u_hat[0], self.v_hat[0])
    }

    /// Largest `|u_hat(-k) - conj(u_hat(k))|`.
    pub fn symmetry_defect(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| {
                let j = self.grid.conjugate_index(i);
                (self.u_hat[j] - self.u_hat[i].conj())
                    .norm()
                    .max((self.v_hat[j] - self.v_hat[i].conj()).norm())
            })
            .fold(0.0, f64::max)
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: f64, other: &Self) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        for (a, b) in self.u_hat.iter_mut().zip(&other.u_hat) {
            *a += b * c;
        }
        for (a, b) in self.v_hat.iter_mut().zip(&other.v_hat) {
            *a += b * c;
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            u_hat: self.u_hat.iter().map(|z| z * c).collect(),
            v_hat: self.v_hat.iter().map(|z| z * c).collect(),
        }
    }

    /// Applies a real radial multiplier `m(|k|^2)` mode by mode; preserves all invariants.
    pub fn map_modes(&self, m: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.grid.len() {
            let (kx, ky) = self.grid.wave_vector(i);
            let f = m(kx * kx + ky * ky);
            out.u_hat[i] *= f;
            out.v_hat[i] *= f;
        }
        out
    }

    /// Zeroes every mode outside the dealiased band.
    pub fn truncated(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.grid.len() {
            if !self.grid.in_band(i) {
                out.u_hat[i] = Complex64::new(0.0, 0.0);
                out.v_hat[i] = Complex64::new(0.0, 0.0);
            }
        }
        out
    }
}

impl InnerProductSpace for VelocityField {
    fn check_compatible(&self, other: &Self) -> dln_core::Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(CoreError::DimensionMismatch {
                left: self.grid.len(),
                right: other.grid.len(),
            })
        }
    }

    fn dot(&self, other: &Self) -> dln_core::Result<f64> {
        self.check_compatible(other)?;
        let s: f64 = self
            .u_hat
            .iter()
            .zip(&other.u_hat)
            .chain(self.v_hat.iter().zip(&other.v_hat))
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        Ok(self.grid.area() * s)
    }

    fn linear_combination(terms: &[(f64, &Self)]) -> dln_core::Result<Self> {
        let (_, first) = terms.first().ok_or(CoreError::SequenceLength {
            name: "terms",
            len: 0,
            needed: 1,
        })?;
        let mut out = VelocityField::zeros(first.grid);
        for (c, x) in terms {
            first.check_compatible(x)?;
            for (o, xi) in out.u_hat.iter_mut().zip(&x.u_hat) {
                *o += xi * *c;
            }
            for (o, xi) in out.v_hat.iter_mut().zip(&x.v_hat) {
                *o += xi * *c;
            }
        }
        Ok(out)
    }
}

/// Orthogonal projection onto divergence-free, zero-mean, real fields.
///
/// Composes three commuting orthogonal projections: removal of the mean and
/// Nyquist modes, symmetrization `u_hat(k) <- (u_hat(k) + conj u_hat(-k))/2`,
/// and the Leray projector `I - k k^T / |k|^2`.
pub fn leray_project(raw: &RawField) -> VelocityField {
    let g = raw.grid;
    let zero = Complex64::new(0.0, 0.0);
    let mut u = vec![zero; g.len()];
    let mut v = vec![zero; g.len()];
    for i in 1..g.len() {
        if g.is_nyquist(i) {
            continue;
        }
        let j = g.conjugate_index(i);
        let a = (raw.u_hat[i] + raw.u_hat[j].conj()) * 0.5;
        let b = (raw.v_hat[i] + raw.v_hat[j].conj()) * 0.5;
        let (kx, ky) = g.wave_vector(i);
        let k2 = kx * kx + ky * ky;
        let p = (a * kx + b * ky) / k2;
        u[i] = a - p * kx;
        v[i] = b - p * ky;
    }
    VelocityField::from_parts(g, u, v)
}

/// Free-function form of [`VelocityField::norms`].
pub fn norms(u: &VelocityField) -> Norms {
    u.norms()
}

//! FFT plumbing, the dealiased advection term and the trilinear form.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::field::{leray_project, RawField, VelocityField};
use crate::grid::TorusGrid;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Planned 2D transforms for one grid. Cheap to clone; safe to share.
#[derive(Clone)]
pub struct SpectralOps {
    grid: TorusGrid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralOps {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralOps").field("grid", &self.grid).finish()
    }
}

/// Real physical-space samples `f(x_j, y_i)` at index `i * n + j`.
pub type PhysicalField = Vec<f64>;

impl SpectralOps {
    pub fn new(grid: TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            fwd: planner.plan_fft_forward(grid.n()),
            inv: planner.plan_fft_inverse(grid.n()),
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    fn transform_2d(&self, buf: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n();
        fft.process(buf);
        transpose_in_place(buf, n);
        fft.process(buf);
        transpose_in_place(buf, n);
    }

    /// Synthesizes `a + i b` from the spectra of two real fields.
    fn pair_to_physical(&self, a: &[Complex64], b: &[Complex64]) -> (PhysicalField, PhysicalField) {
        let i = Complex64::new(0.0, 1.0);
        let mut buf: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x + i * y).collect();
        self.transform_2d(&mut buf, &self.inv);
        (buf.iter().map(|z| z.re).collect(), buf.iter().map(|z| z.im).collect())
    }

    /// Analyses two real fields at once; exact up to roundoff for real inputs.
    fn pair_to_spectral(&self, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let g = &self.grid;
        let scale = 1.0 / g.len() as f64;
        let mut buf: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect();
        self.transform_2d(&mut buf, &self.fwd);
        let mut sa = vec![ZERO; g.len()];
        let mut sb = vec![ZERO; g.len()];
        for k in 0..g.len() {
            let z = buf[k];
            let zc = buf[g.conjugate_index(k)].conj();
            sa[k] = (z + zc) * (0.5 * scale);
            sb[k] = (z - zc) * Complex64::new(0.0, -0.5 * scale);
        }
        (sa, sb)
    }

    pub fn to_physical(&self, u: &VelocityField) -> (PhysicalField, PhysicalField) {
        self.pair_to_physical(u.u_hat(), u.v_hat())
    }

    pub fn raw_to_physical(&self, u: &RawField) -> (PhysicalField, PhysicalField) {
        self.pair_to_physical(&u.u_hat, &u.v_hat)
    }

    /// Spectral coefficients of a real vector field given by samples.
    pub fn from_physical(&self, u: &[f64], v: &[f64]) -> RawField {
        let (u_hat, v_hat) = self.pair_to_spectral(u, v);
        RawField {
            grid: self.grid,
            u_hat,
            v_hat,
        }
    }

    /// Dealiased advection product `T((T u . grad) T v)` before projection.
    pub fn advection_raw(&self, u: &VelocityField, v: &VelocityField) -> Result<RawField> {
        let g = &self.grid;
        g.check_same(u.grid())?;
        g.check_same(v.grid())?;
        let tu = u.truncated();
        let tv = v.truncated();
        let i = Complex64::new(0.0, 1.0);
        let mut dx1 = vec![ZERO; g.len()];
        let mut dy1 = vec![ZERO; g.len()];
        let mut dx2 = vec![ZERO; g.len()];
        let mut dy2 = vec![ZERO; g.len()];
        for k in 0..g.len() {
            let (kx, ky) = g.wave_vector(k);
            dx1[k] = i * kx * tv.u_hat()[k];
            dy1[k] = i * ky * tv.u_hat()[k];
            dx2[k] = i * kx * tv.v_hat()[k];
            dy2[k] = i * ky * tv.v_hat()[k];
        }
        let (w1, w2) = self.pair_to_physical(tu.u_hat(), tu.v_hat());
        let (a1, b1) = self.pair_to_physical(&dx1, &dy1);
        let (a2, b2) = self.pair_to_physical(&dx2, &dy2);
        let p1: Vec<f64> = (0..g.len()).map(|j| w1[j] * a1[j] + w2[j] * b1[j]).collect();
        let p2: Vec<f64> = (0..g.len()).map(|j| w1[j] * a2[j] + w2[j] * b2[j]).collect();
        let mut raw = self.from_physical(&p1, &p2);
        for k in 0..g.len() {
            if !g.in_band(k) {
                raw.u_hat[k] = ZERO;
                raw.v_hat[k] = ZERO;
            }
        }
        Ok(raw)
    }

    /// `B(u, v) = P T((T u . grad) T v)`, the projected advection term.
    pub fn advection(&self, u: &VelocityField, v: &VelocityField) -> Result<VelocityField> {
        Ok(leray_project(&self.advection_raw(u, v)?))
    }

    /// Discrete `b(u, v, w) = (T((T u . grad) T v), T w)`.
    ///
    /// Exactly skew in `(v, w)` for solenoidal `u`, because the truncated
    /// product is computed alias-free.
    pub fn trilinear_b(&self, u: &VelocityField, v: &VelocityField, w: &VelocityField) -> Result<f64> {
        self.grid.check_same(w.grid())?;
        let raw = self.advection_raw(u, v)?;
        let mut s = 0.0;
        for k in 0..self.grid.len() {
            if self.grid.in_band(k) {
                s += (raw.u_hat[k] * w.u_hat()[k].conj()).re + (raw.v_hat[k] * w.v_hat()[k].conj()).re;
            }
        }
        Ok(self.grid.area() * s)
    }

    /// `||u||_{L4}^2`, by quadrature on a grid refined enough to be exact
    /// for band-limited inputs (`|k_i| <= n/3`).
    pub fn l4_norm_sq(&self, u: &VelocityField) -> Result<f64> {
        let n = self.grid.n();
        let fine = TorusGrid::new(2 * n, self.grid.length())?;
        let ops = SpectralOps::new(fine);
        let mut raw = RawField::zeros(fine);
        for k in 0..self.grid.len() {
            if self.grid.is_nyquist(k) {
                continue;
            }
            let kx = self.grid.wavenumber(k % n);
            let ky = self.grid.wavenumber(k / n);
            let idx = fine.index_of(ky) * fine.n() + fine.index_of(kx);
            raw.u_hat[idx] = u.u_hat()[k];
            raw.v_hat[idx] = u.v_hat()[k];
        }
        let (a, b) = ops.raw_to_physical(&raw);
        let s: f64 = a.iter().zip(&b).map(|(x, y)| (x * x + y * y).powi(2)).sum();
        Ok((s * fine.area() / fine.len() as f64).sqrt())
    }
}

fn transpose_in_place(buf: &mut [Complex64], n: usize) {
    for r in 0..n {
        for c in (r + 1)..n {
            buf.swap(r * n + c, c * n + r);
        }
    }
}

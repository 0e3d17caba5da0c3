use std::f64::consts::PI;

use crate::error::{Result, SpectralError};

/// Uniform `n x n` grid on the torus `[0, L)^2`.
///
/// Spectral arrays are row-major with index `iy * n + ix`; integer
/// wavenumbers follow FFT order `0, 1, .., n/2, -n/2+1, .., -1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGrid {
    n: usize,
    length: f64,
}

impl TorusGrid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(SpectralError::GridSize(n));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(SpectralError::Period(length));
        }
        Ok(Self { n, length })
    }

    /// `n x n` grid with period `2 pi`.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.length
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `2 pi / L`
    #[inline]
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Integer wavenumber of FFT index `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT index of integer wavenumber `k` (taken modulo `n`).
    #[inline]
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Flat index of the mode `-k`.
    #[inline]
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let (iy, ix) = (idx / self.n, idx % self.n);
        ((self.n - iy) % self.n) * self.n + (self.n - ix) % self.n
    }

    /// Physical wave vector `(kx, ky)` of a flat index.
    #[inline]
    pub fn wave_vector(&self, idx: usize) -> (f64, f64) {
        let k0 = self.k0();
        (
            k0 * self.wavenumber(idx % self.n) as f64,
            k0 * self.wavenumber(idx / self.n) as f64,
        )
    }

    /// True for the unpaired `n/2` modes, which are kept at zero.
    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        idx % self.n == self.n / 2 || idx / self.n == self.n / 2
    }

    /// Largest `K` with `3K < n`: products of fields with `|k_i| <= K` are alias-free on this band.
    #[inline]
    pub fn dealias_cutoff(&self) -> usize {
        (self.n - 1) / 3
    }

    #[inline]
    pub fn in_band(&self, idx: usize) -> bool {
        let c = self.dealias_cutoff() as i64;
        self.wavenumber(idx % self.n).abs() <= c && self.wavenumber(idx / self.n).abs() <= c
    }

    /// Area of the torus, `L^2`.
    #[inline]
    pub fn area(&self) -> f64 {
        self.length * self.length
    }

    /// Smallest eigenvalue of the Stokes operator on zero-mean fields: `(2 pi / L)^2`.
    pub fn stokes_lambda1(&self) -> f64 {
        self.k0() * self.k0()
    }

    pub(crate) fn check_same(&self, other: &TorusGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(SpectralError::GridMismatch {
                left_n: self.n,
                left_l: self.length,
                right_n: other.n,
                right_l: other.length,
            })
        }
    }
}

/// Free-function form of [`TorusGrid::stokes_lambda1`].
pub fn stokes_lambda1(grid: &TorusGrid) -> f64 {
    grid.stokes_lambda1()
}

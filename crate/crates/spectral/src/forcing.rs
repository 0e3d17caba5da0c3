use num_complex::Complex64;

use crate::error::{Result, SpectralError};
use crate::field::{leray_project, RawField, VelocityField};
use crate::grid::TorusGrid;

/// One term `amplitude * (k_perp / |k|) * cos(k . x + phase)`; solenoidal by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingMode {
    pub kx: i64,
    pub ky: i64,
    pub amplitude: f64,
    pub phase: f64,
}

/// Optional factor `1 + delta * sin(omega t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulation {
    pub delta: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForcingSpec {
    modes: Vec<ForcingMode>,
    modulation: Option<Modulation>,
    steady: VelocityField,
    f_inf: f64,
}

impl ForcingSpec {
    pub fn new(grid: TorusGrid, modes: Vec<ForcingMode>, modulation: Option<Modulation>) -> Result<Self> {
        let cutoff = grid.dealias_cutoff();
        let mut raw = RawField::zeros(grid);
        for m in &modes {
            if m.kx == 0 && m.ky == 0 {
                return Err(SpectralError::MeanForcing { kx: 0, ky: 0 });
            }
            if m.kx.unsigned_abs() as usize > cutoff || m.ky.unsigned_abs() as usize > cutoff {
                return Err(SpectralError::ForcingOutOfBand {
                    kx: m.kx,
                    ky: m.ky,
                    cutoff,
                });
            }
            if !m.amplitude.is_finite() || !m.phase.is_finite() {
                return Err(SpectralError::Domain {
                    name: "forcing amplitude/phase",
                    value: m.amplitude,
                    requirement: "finite",
                });
            }
            let norm = ((m.kx * m.kx + m.ky * m.ky) as f64).sqrt();
            let (ex, ey) = (-(m.ky as f64) / norm, m.kx as f64 / norm);
            let c = Complex64::from_polar(0.5 * m.amplitude, m.phase);
            let n = grid.n();
            let ip = grid.index_of(m.ky) * n + grid.index_of(m.kx);
            let im = grid.index_of(-m.ky) * n + grid.index_of(-m.kx);
            raw.u_hat[ip] += c * ex;
            raw.v_hat[ip] += c * ey;
            raw.u_hat[im] += c.conj() * ex;
            raw.v_hat[im] += c.conj() * ey;
        }
        if let Some(md) = modulation {
            if !(md.delta.is_finite() && md.omega.is_finite()) {
                return Err(SpectralError::Domain {
                    name: "modulation",
                    value: md.delta,
                    requirement: "finite",
                });
            }
        }
        let steady = leray_project(&raw);
        let amp = 1.0 + modulation.map_or(0.0, |m| m.delta.abs());
        let f_inf = steady.norms().l2_sq.sqrt() * amp;
        Ok(Self {
            modes,
            modulation,
            steady,
            f_inf,
        })
    }

    pub fn zero(grid: TorusGrid) -> Self {
        Self {
            modes: Vec::new(),
            modulation: None,
            steady: VelocityField::zeros(grid),
            f_inf: 0.0,
        }
    }

    pub fn modes(&self) -> &[ForcingMode] {
        &self.modes
    }

    pub fn modulation(&self) -> Option<Modulation> {
        self.modulation
    }

    /// `sup_t ||f(t)||`
    pub fn f_inf(&self) -> f64 {
        self.f_inf
    }

    pub fn is_zero(&self) -> bool {
        self.f_inf == 0.0
    }

    pub fn grid(&self) -> &TorusGrid {
        self.steady.grid()
    }

    pub fn factor(&self, t: f64) -> f64 {
        self.modulation
            .map_or(1.0, |m| 1.0 + m.delta * (m.omega * t).sin())
    }

    pub fn eval(&self, t: f64) -> VelocityField {
        let c = self.factor(t);
        if c == 1.0 {
            self.steady.clone()
        } else {
            self.steady.scaled(c)
        }
    }

    /// `||f(t)||` at one instant.
    pub fn norm_at(&self, t: f64) -> f64 {
        self.factor(t).abs() * self.steady.norms().l2_sq.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mean_and_out_of_band() {
        let g = TorusGrid::standard(16).unwrap();
        let m = |kx, ky| ForcingMode {
            kx,
            ky,
            amplitude: 1.0,
            phase: 0.0,
        };
        assert!(matches!(
            ForcingSpec::new(g, vec![m(0, 0)], None),
            Err(SpectralError::MeanForcing { .. })
        ));
        assert!(ForcingSpec::new(g, vec![m(6, 0)], None).is_err());
        assert!(ForcingSpec::new(g, vec![m(5, -5)], None).is_ok());
    }

    #[test]
    fn f_inf_matches_mode_list() {
        let g = TorusGrid::standard(32).unwrap();
        let modes = vec![
            ForcingMode {
                kx: 1,
                ky: 2,
                amplitude: 0.7,
                phase: 0.3,
            },
            ForcingMode {
                kx: -3,
                ky: 1,
                amplitude: 1.2,
                phase: -1.0,
            },
        ];
        let f = ForcingSpec::new(g, modes, Some(Modulation { delta: 0.25, omega: 2.0 })).unwrap();
        let area = g.area();
        let expected = ((0.49 + 1.44) * area / 2.0).sqrt() * 1.25;
        assert!((f.f_inf() - expected).abs() <= 1e-10 * expected);
        assert!(f.norm_at(0.3) <= f.f_inf());
        let ft = f.eval(0.0);
        assert!(ft.relative_divergence() < 1e-15);
        assert_eq!(ft.mean(), (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
    }
}

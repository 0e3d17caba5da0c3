//! Snapshot and spectrum export.
//!
//! Snapshot layout (little endian):
//!
//! ```text
//! magic  b"DLNSNAP1"
//! n      u64
//! L      f64
//! n*n records in row-major wavenumber order (index iy*n + ix):
//!        re(u_hat) im(u_hat) re(v_hat) im(v_hat)   4 x f64
//! ```

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Result, SpectralError};
use crate::field::{leray_project, RawField, VelocityField};
use crate::grid::TorusGrid;

const MAGIC: &[u8; 8] = b"DLNSNAP1";

pub fn write_snapshot<W: Write>(mut w: W, u: &VelocityField) -> Result<()> {
    let g = u.grid();
    w.write_all(MAGIC)?;
    w.write_all(&(g.n() as u64).to_le_bytes())?;
    w.write_all(&g.length().to_le_bytes())?;
    for (a, b) in u.u_hat().iter().zip(u.v_hat()) {
        for x in [a.re, a.im, b.re, b.im] {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads a snapshot, rejecting data that is not solenoidal, zero-mean and real to roundoff.
pub fn read_snapshot<R: Read>(mut r: R) -> Result<VelocityField> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SpectralError::Snapshot("bad magic".into()));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let length = f64::from_le_bytes(b8);
    let grid = TorusGrid::new(n, length)?;
    let mut raw = RawField::zeros(grid);
    let mut rec = [0u8; 32];
    for k in 0..grid.len() {
        r.read_exact(&mut rec)
            .map_err(|e| SpectralError::Snapshot(format!("truncated at mode {k}: {e}")))?;
        let f = |i: usize| f64::from_le_bytes(rec[8 * i..8 * i + 8].try_into().unwrap());
        raw.u_hat[k] = Complex64::new(f(0), f(1));
        raw.v_hat[k] = Complex64::new(f(2), f(3));
    }
    let projected = leray_project(&raw);
    let scale = raw
        .u_hat
        .iter()
        .chain(&raw.v_hat)
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let defect = raw
        .u_hat
        .iter()
        .chain(&raw.v_hat)
        .zip(projected.u_hat().iter().chain(projected.v_hat()))
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if defect > 1e-12 * scale {
        return Err(SpectralError::Snapshot(format!(
            "field violates the velocity invariants (defect {defect:e})"
        )));
    }
    Ok(VelocityField::from_parts(grid, raw.u_hat, raw.v_hat))
}

/// Shell-summed energy `E(k) = 1/2 sum_{k - 1/2 < |k'| <= k + 1/2} |u_hat(k')|^2 L^2`,
/// integer shells `1..=n/2`.
pub fn energy_spectrum(u: &VelocityField) -> Vec<(usize, f64)> {
    let g = u.grid();
    let n = g.n();
    let mut shells = vec![0.0; n / 2 + 1];
    for idx in 0..g.len() {
        let kx = g.wavenumber(idx % n) as f64;
        let ky = g.wavenumber(idx / n) as f64;
        let s = (kx * kx + ky * ky).sqrt().round() as usize;
        if s < shells.len() {
            shells[s] += 0.5 * g.area() * (u.u_hat()[idx].norm_sqr() + u.v_hat()[idx].norm_sqr());
        }
    }
    shells.into_iter().enumerate().skip(1).collect()
}

pub fn write_spectrum_csv<W: Write>(mut w: W, u: &VelocityField) -> Result<()> {
    writeln!(w, "shell,energy")?;
    for (k, e) in energy_spectrum(u) {
        writeln!(w, "{k},{e:.16e}")?;
    }
    Ok(())
}

//! Solver for the implicit stage equation
//!
//! ```text
//! w + gamma (nu A w + B(w, w)) = rhs
//! ```
//!
//! The Stokes part is inverted exactly mode by mode; the advection term is lagged.

use std::collections::VecDeque;

use dln_core::InnerProductSpace;
use dln_spectral::{SpectralOps, VelocityField};

use crate::error::{Result, StepperError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    /// Plain Picard iteration on the lagged advection term.
    FixedPoint,
    /// Anderson-accelerated Picard iteration (a quasi-Newton method).
    NewtonLike,
}

impl SolverMode {
    pub fn name(&self) -> &'static str {
        match self {
            Self::FixedPoint => "fixed-point",
            Self::NewtonLike => "newton-like",
        }
    }
}

impl std::str::FromStr for SolverMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fixed-point" => Ok(Self::FixedPoint),
            "newton-like" => Ok(Self::NewtonLike),
            other => Err(format!("unknown solver mode `{other}` (fixed-point | newton-like)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverPolicy {
    pub mode: SolverMode,
    /// Relative residual target.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverPolicy {
    fn default() -> Self {
        Self {
            mode: SolverMode::FixedPoint,
            tol: 1e-11,
            max_iter: 100,
        }
    }
}

impl SolverPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(StepperError::Config(format!("solver tol = {} must be > 0", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(StepperError::Config("solver max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct StageSolution {
    pub w: VelocityField,
    pub iters: usize,
    /// `||w + gamma (nu A w + B(w,w)) - rhs|| / max(||rhs||, ||w||)`
    pub residual: f64,
}

const ANDERSON_DEPTH: usize = 5;

fn norm(u: &VelocityField) -> f64 {
    u.norm_sq().sqrt()
}

fn diff(a: &VelocityField, b: &VelocityField) -> VelocityField {
    VelocityField::linear_combination(&[(1.0, a), (-1.0, b)]).expect("same grid")
}

/// Solves the stage equation starting from `guess`.
pub fn solve_stage(
    ops: &SpectralOps,
    gamma: f64,
    nu: f64,
    rhs: &VelocityField,
    guess: &VelocityField,
    policy: &SolverPolicy,
    step: usize,
) -> Result<StageSolution> {
    policy.validate()?;
    let stokes_inv = |u: &VelocityField| u.map_modes(|k2| 1.0 / (1.0 + gamma * nu * k2));
    let rhs_norm = norm(rhs);
    // fixed-point map G(w) = (I + gamma nu A)^{-1} (rhs - gamma B(w, w))
    let picard = |w: &VelocityField| -> Result<(VelocityField, f64)> {
        let bw = ops.advection(w, w)?;
        let mut r = rhs.clone();
        r.axpy(-gamma, &bw)?;
        let g = stokes_inv(&r);
        // residual of the stage equation at w
        let mut res = w.map_modes(|k2| 1.0 + gamma * nu * k2);
        res.axpy(gamma, &bw)?;
        res.axpy(-1.0, rhs)?;
        let scale = rhs_norm.max(norm(w));
        let rel = if scale == 0.0 { norm(&res) } else { norm(&res) / scale };
        Ok((g, rel))
    };

    let mut w = guess.clone();
    let mut hist_w: VecDeque<VelocityField> = VecDeque::new();
    let mut hist_f: VecDeque<VelocityField> = VecDeque::new();
    let mut last = f64::INFINITY;
    for it in 0..=policy.max_iter {
        let (g, rel) = picard(&w)?;
        last = rel;
        if rel <= policy.tol {
            return Ok(StageSolution {
                w,
                iters: it,
                residual: rel,
            });
        }
        if !rel.is_finite() {
            break;
        }
        if it == policy.max_iter {
            break;
        }
        w = match policy.mode {
            SolverMode::FixedPoint => g,
            SolverMode::NewtonLike => {
                let f = diff(&g, &w);
                hist_w.push_back(w.clone());
                hist_f.push_back(f.clone());
                if hist_w.len() > ANDERSON_DEPTH + 1 {
                    hist_w.pop_front();
                    hist_f.pop_front();
                }
                anderson_update(&hist_w, &hist_f, &g)
            }
        };
    }
    Err(StepperError::NonConvergence {
        step,
        iters: policy.max_iter,
        residual: last,
    })
}

/// Type-II Anderson mixing over the stored history (last entry is current).
fn anderson_update(ws: &VecDeque<VelocityField>, fs: &VecDeque<VelocityField>, g: &VelocityField) -> VelocityField {
    let m = ws.len() - 1;
    if m == 0 {
        return g.clone();
    }
    let f_cur = &fs[m];
    let df: Vec<VelocityField> = (0..m).map(|i| diff(&fs[i + 1], &fs[i])).collect();
    let dg: Vec<VelocityField> = (0..m)
        .map(|i| {
            // G(w_i) = w_i + f_i
            let gi1 = VelocityField::linear_combination(&[(1.0, &ws[i + 1]), (1.0, &fs[i + 1])]).unwrap();
            let gi = VelocityField::linear_combination(&[(1.0, &ws[i]), (1.0, &fs[i])]).unwrap();
            diff(&gi1, &gi)
        })
        .collect();
    // normal equations (dF^T dF + reg) c = dF^T f
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for i in 0..m {
        for j in 0..=i {
            let v = df[i].dot(&df[j]).unwrap();
            a[i][j] = v;
            a[j][i] = v;
        }
        b[i] = df[i].dot(f_cur).unwrap();
    }
    let trace: f64 = (0..m).map(|i| a[i][i]).sum();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += 1e-12 * trace.max(f64::MIN_POSITIVE);
    }
    let Some(c) = solve_dense(a, b) else {
        return g.clone();
    };
    let mut out = g.clone();
    for i in 0..m {
        out.axpy(-c[i], &dg[i]).unwrap();
    }
    out
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in (col + 1)..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = ((r + 1)..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_solver() {
        let x = solve_dense(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        assert!(solve_dense(vec![vec![0.0, 0.0], vec![0.0, 0.0]], vec![1.0, 1.0]).is_none());
    }

    #[test]
    fn policy_validation() {
        assert!(SolverPolicy::default().validate().is_ok());
        let bad = SolverPolicy {
            tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!("newton-like".parse::<SolverMode>().unwrap(), SolverMode::NewtonLike);
        assert!("newton".parse::<SolverMode>().is_err());
    }
}

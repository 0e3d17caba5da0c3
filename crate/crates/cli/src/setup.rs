//! Builds grids, forcing, initial data and solver policies from a [`ConfigMap`].

use std::f64::consts::PI;

use dln_core::{max_timestep, ThetaParam};
use dln_spectral::{random_field, taylor_green, ForcingMode, ForcingSpec, Modulation, TorusGrid, VelocityField};
use dln_stepper::{fmt_f64, SolverMode, SolverPolicy};

use crate::config::ConfigMap;
use crate::error::{CliError, Result};

/// Resolved values echoed into manifests, in insertion order.
#[derive(Debug, Clone, Default)]
pub struct Echo(pub Vec<(String, String)>);

impl Echo {
    pub fn num(&mut self, k: &str, v: f64) {
        self.0.push((k.into(), fmt_f64(v)));
    }
    pub fn int(&mut self, k: &str, v: impl ToString) {
        self.0.push((k.into(), v.to_string()));
    }
    pub fn text(&mut self, k: &str, v: &str) {
        self.0.push((k.into(), v.into()));
    }
}

pub fn theta(cfg: &ConfigMap) -> Result<ThetaParam> {
    Ok(ThetaParam::new(cfg.f64_or("theta", 0.5)?)?)
}

pub fn positive(cfg: &ConfigMap, key: &str, default: f64) -> Result<f64> {
    let v = cfg.f64_or(key, default)?;
    if !(v.is_finite() && v > 0.0) {
        return Err(CliError::Config(format!("`{key}` = {v} must be finite and > 0")));
    }
    Ok(v)
}

pub fn grid(cfg: &ConfigMap) -> Result<TorusGrid> {
    let n = cfg.usize_or("n", 32)?;
    let length = positive(cfg, "length", 2.0 * PI)?;
    Ok(TorusGrid::new(n, length)?)
}

/// `dt` if given, else `dt_frac * C_dt`.
pub fn timestep(cfg: &ConfigMap, theta: ThetaParam, nu: f64, lambda1: f64) -> Result<f64> {
    match cfg.f64_opt("dt")? {
        Some(dt) => {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(CliError::Config(format!("`dt` = {dt} must be > 0")));
            }
            Ok(dt)
        }
        None => {
            let frac = positive(cfg, "dt_frac", 0.5)?;
            Ok(frac * max_timestep(theta, nu, lambda1)?)
        }
    }
}

/// Two-mode forcing used by the `gentle:AMP` shorthand.
pub fn gentle_modes(amp: f64) -> Vec<ForcingMode> {
    vec![
        ForcingMode {
            kx: 1,
            ky: 2,
            amplitude: amp,
            phase: 0.3,
        },
        ForcingMode {
            kx: 3,
            ky: -1,
            amplitude: 0.5 * amp,
            phase: 1.0,
        },
    ]
}

/// `none` | `gentle:AMP` | `modes:kx,ky,amp,phase;...`
pub fn forcing(cfg: &ConfigMap, grid: TorusGrid) -> Result<ForcingSpec> {
    let spec = cfg.str_or("forcing", "none");
    let modes = if spec == "none" {
        Vec::new()
    } else if let Some(a) = spec.strip_prefix("gentle:") {
        gentle_modes(crate::config::parse_f64("forcing", a)?)
    } else if let Some(list) = spec.strip_prefix("modes:") {
        list.split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|m| {
                let p: Vec<&str> = m.split(',').map(str::trim).collect();
                if p.len() != 4 {
                    return Err(CliError::Config(format!("forcing mode `{m}`: expected kx,ky,amp,phase")));
                }
                let int = |s: &str| {
                    s.parse::<i64>()
                        .map_err(|_| CliError::Config(format!("forcing wavenumber `{s}` is not an integer")))
                };
                Ok(ForcingMode {
                    kx: int(p[0])?,
                    ky: int(p[1])?,
                    amplitude: crate::config::parse_f64("forcing", p[2])?,
                    phase: crate::config::parse_f64("forcing", p[3])?,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        return Err(CliError::Config(format!(
            "forcing `{spec}`: expected none | gentle:AMP | modes:kx,ky,amp,phase;..."
        )));
    };
    let modulation = match (cfg.f64_opt("forcing_delta")?, cfg.f64_opt("forcing_omega")?) {
        (None, None) => None,
        (d, o) => Some(Modulation {
            delta: d.unwrap_or(0.0),
            omega: o.unwrap_or(0.0),
        }),
    };
    if modes.is_empty() {
        return Ok(ForcingSpec::zero(grid));
    }
    Ok(ForcingSpec::new(grid, modes, modulation)?)
}

/// `taylor-green` (amplitude `ic_norm`) | `random` (L2 norm `ic_norm`, seeded) | `zero`.
pub fn initial_condition(cfg: &ConfigMap, grid: TorusGrid, scale: f64, seed: u64) -> Result<VelocityField> {
    let norm = cfg.f64_or("ic_norm", 1.0)? * scale;
    if !(norm.is_finite() && norm >= 0.0) {
        return Err(CliError::Config(format!("`ic_norm` = {norm} must be >= 0")));
    }
    match cfg.str_or("ic", "random") {
        "taylor-green" => Ok(taylor_green(grid, norm)),
        "random" => Ok(random_field(grid, seed, norm)?),
        "zero" => Ok(VelocityField::zeros(grid)),
        other => Err(CliError::Config(format!(
            "ic `{other}`: expected taylor-green | random | zero"
        ))),
    }
}

pub fn policy(cfg: &ConfigMap) -> Result<SolverPolicy> {
    let mode: SolverMode = cfg
        .str_or("solver", "fixed-point")
        .parse()
        .map_err(CliError::Config)?;
    let p = SolverPolicy {
        mode,
        tol: cfg.f64_or("tol", 1e-11)?,
        max_iter: cfg.usize_or("max_iter", 100)?,
    };
    p.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(p)
}

//! Flat `key=value` configuration: presets < config file < command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

/// Environment variable that relocates every relative output directory.
pub const OUTPUT_ROOT_ENV: &str = "DLN_OUTPUT_ROOT";

pub const KNOWN_KEYS: &[&str] = &[
    "command",
    "preset",
    "theta",
    "nu",
    "lambda1",
    "dt",
    "dt_frac",
    "n",
    "length",
    "steps",
    "t_end",
    "forcing",
    "forcing_delta",
    "forcing_omega",
    "ic",
    "ic_norm",
    "ic_compare",
    "seed",
    "start",
    "solver",
    "tol",
    "max_iter",
    "r",
    "snapshot_every",
    "diagnostic",
    "theta_grid",
    "thetas",
    "halvings",
    "instances",
    "out",
];

fn normalize_key(k: &str) -> String {
    k.trim().replace('-', "_")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    map: BTreeMap<String, String>,
}

impl ConfigMap {
    /// Later calls override earlier ones.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let k = normalize_key(key);
        if !KNOWN_KEYS.contains(&k.as_str()) {
            return Err(CliError::Config(format!("unknown key `{k}`")));
        }
        self.map.insert(k, value.trim().to_string());
        Ok(())
    }

    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected key=value, got `{pair}`")))?;
        self.set(k, v)
    }

    /// Parses `key=value` lines; blank lines and `#` comments are skipped.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut m = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            m.set_pair(line)
                .map_err(|e| CliError::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_text(&text)
    }

    pub fn merge_from(&mut self, other: &ConfigMap) {
        for (k, v) in &other.map {
            self.map.insert(k.clone(), v.clone());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_f64(key, v),
        }
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Config(format!("`{key}` = `{v}` is not a non-negative integer"))),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Config(format!("`{key}` = `{v}` is not a non-negative integer"))),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(v) => Err(CliError::Config(format!("`{key}` = `{v}` is not a boolean"))),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    /// Comma-separated list of reals.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| v.split(',').map(|s| parse_f64(key, s.trim())).collect())
            .transpose()
    }
}

pub fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| CliError::Config(format!("`{key}` = `{v}` is not a number")))?;
    if x.is_nan() {
        return Err(CliError::Config(format!("`{key}` is NaN")));
    }
    Ok(x)
}

/// `start:stop:step`, inclusive of `stop` up to rounding.
pub fn parse_grid(key: &str, v: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = v.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!("`{key}` = `{v}`: expected start:stop:step")));
    }
    let (a, b, h) = (
        parse_f64(key, parts[0])?,
        parse_f64(key, parts[1])?,
        parse_f64(key, parts[2])?,
    );
    if !(h > 0.0) || b < a || !a.is_finite() || !b.is_finite() {
        return Err(CliError::Config(format!("`{key}` = `{v}`: need start <= stop and step > 0")));
    }
    let count = ((b - a) / h + 1e-9).floor() as usize + 1;
    // multiply rather than accumulate so the points are reproducible
    Ok((0..count).map(|i| a + i as f64 * h).collect())
}

/// Defaults attached to a named preset.
pub fn preset(name: &str) -> Result<ConfigMap> {
    let pairs: &[(&str, &str)] = match name {
        "decay" => &[
            ("theta", "0.5"),
            ("nu", "0.1"),
            ("n", "64"),
            ("dt", "0.05"),
            ("steps", "400"),
            ("forcing", "none"),
            ("ic", "taylor-green"),
            ("start", "exact"),
        ],
        "attractor" => &[
            ("theta", "0.5"),
            ("nu", "0.1"),
            ("n", "64"),
            ("dt_frac", "0.5"),
            ("steps", "5000"),
            ("forcing", "gentle:0.05"),
            ("ic", "random"),
            ("ic_norm", "0.05"),
            ("ic_compare", "100"),
            ("solver", "newton-like"),
            ("r", "25"),
        ],
        "taylor-green-convergence" => &[
            ("nu", "1"),
            ("n", "32"),
            ("dt", "0.02"),
            ("halvings", "4"),
            ("t_end", "1"),
            ("thetas", "0.2,0.5,0.8"),
        ],
        other => {
            return Err(CliError::Config(format!(
                "unknown preset `{other}` (decay | attractor | taylor-green-convergence)"
            )))
        }
    };
    let mut m = ConfigMap::default();
    for (k, v) in pairs {
        m.set(k, v)?;
    }
    Ok(m)
}

/// Layers preset, file and flags.
pub fn resolve(file: Option<&Path>, flags: &ConfigMap) -> Result<ConfigMap> {
    let from_file = match file {
        Some(p) => ConfigMap::load(p)?,
        None => ConfigMap::default(),
    };
    let preset_name = flags.get("preset").or(from_file.get("preset"));
    let mut out = match preset_name {
        Some(p) => preset(p)?,
        None => ConfigMap::default(),
    };
    out.merge_from(&from_file);
    out.merge_from(flags);
    Ok(out)
}

/// Output directory: relative paths are placed under `$DLN_OUTPUT_ROOT` when set.
pub fn output_dir(cfg: &ConfigMap) -> PathBuf {
    let out = PathBuf::from(cfg.str_or("out", "dln-out"));
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if out.is_relative() => PathBuf::from(root).join(out),
        _ => out,
    }
}

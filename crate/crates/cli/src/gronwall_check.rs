//! Randomized brute-force check of both discrete Grönwall lemmas.

use std::io::Write;

use dln_core::{gronwall_bound, uniform_gronwall_bound, GronwallInput, UniformWindow};
use dln_stepper::fmt_f64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{output_dir, ConfigMap};
use crate::error::{Result, Status};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaReport {
    pub instances: usize,
    pub checks: usize,
    pub violations: usize,
    /// `min (bound - xi) / bound` over all checks.
    pub worst_relative_margin: f64,
}

impl LemmaReport {
    fn new(instances: usize) -> Self {
        Self {
            instances,
            checks: 0,
            violations: 0,
            worst_relative_margin: f64::INFINITY,
        }
    }

    fn record(&mut self, xi: f64, bound: f64) {
        self.checks += 1;
        if xi > bound * (1.0 + 1e-12) {
            self.violations += 1;
        }
        self.worst_relative_margin = self.worst_relative_margin.min((bound - xi) / bound.max(1e-300));
    }
}

const HORIZON: usize = 50;

/// Sequences saturate the recursion `xi_n <= xi_{n-1}(1 + k eta_{n-1}) + k zeta_n`
/// or satisfy it with random slack (half the instances each).
pub fn check_finite(seed: u64, instances: usize) -> Result<LemmaReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = LemmaReport::new(instances);
    for _ in 0..instances {
        let k = rng.gen_range(1e-3..1.0);
        let xi0 = rng.gen_range(0.0..10.0);
        let eta: Vec<f64> = (0..=HORIZON).map(|_| rng.gen_range(0.0..3.0)).collect();
        let zeta: Vec<f64> = (0..=HORIZON).map(|_| rng.gen_range(0.0..5.0)).collect();
        let slack = rng.gen_bool(0.5);
        let inp = GronwallInput { k, xi0, eta, zeta };
        let mut xi = xi0;
        for n in 1..=HORIZON {
            let rhs = xi * (1.0 + k * inp.eta[n - 1]) + k * inp.zeta[n];
            xi = if slack { rhs * rng.gen_range(0.0..1.0) } else { rhs };
            if n >= 2 {
                rep.record(xi, gronwall_bound(&inp, n)?);
            }
        }
    }
    Ok(rep)
}

/// Same recursion started at a random index `n1 - 1` with a random (large) start value.
pub fn check_uniform(seed: u64, instances: usize) -> Result<LemmaReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = LemmaReport::new(instances);
    for _ in 0..instances {
        let n2 = rng.gen_range(1..10);
        let n1 = rng.gen_range(1..10);
        let n_star = n1 + n2 + 1 + rng.gen_range(0..30);
        let w = UniformWindow::new(n1, n2, n_star)?;
        let k = rng.gen_range(1e-3..0.5);
        let eta: Vec<f64> = (0..=n_star).map(|_| rng.gen_range(0.0..2.0)).collect();
        let zeta: Vec<f64> = (0..=n_star).map(|_| rng.gen_range(0.0..5.0)).collect();
        let mut xi = vec![0.0; n_star + 1];
        xi[n1 - 1] = rng.gen_range(0.0..100.0);
        let slack = rng.gen_bool(0.5);
        for n in n1..=n_star {
            let rhs = xi[n - 1] * (1.0 + k * eta[n - 1]) + k * zeta[n];
            xi[n] = if slack { rhs * rng.gen_range(0.0..1.0) } else { rhs };
        }
        let a1 = w.max_window_sum(k, &eta)?;
        let a2 = w.max_window_sum(k, &zeta)?;
        let a3 = w.max_window_sum(k, &xi)?;
        let b = uniform_gronwall_bound(w, a1, a2, a3, k)?;
        for n in w.valid_range() {
            rep.record(xi[n], b);
        }
    }
    Ok(rep)
}

pub fn cmd_gronwall_check(cfg: &ConfigMap, out: &mut dyn Write) -> Result<Status> {
    let seed = cfg.u64_or("seed", 7)?;
    let instances = cfg.usize_or("instances", 1000)?;
    let finite = check_finite(seed, instances)?;
    let uniform = check_uniform(seed.wrapping_add(1), instances)?;
    let dir = output_dir(cfg);
    std::fs::create_dir_all(&dir)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join("gronwall.csv"))?);
    writeln!(f, "lemma,instances,checks,violations,worst_relative_margin")?;
    for (name, r) in [("finite", finite), ("uniform", uniform)] {
        let line = format!(
            "{name},{},{},{},{}",
            r.instances,
            r.checks,
            r.violations,
            fmt_f64(r.worst_relative_margin)
        );
        writeln!(f, "{line}")?;
        writeln!(out, "{line}")?;
    }
    f.flush()?;
    Ok(Status::from_violations(finite.violations + uniform.violations))
}

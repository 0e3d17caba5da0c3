//! Discrete Grönwall inequalities for sequences obeying
//! `xi_n <= xi_{n-1} (1 + k eta_{n-1}) + k zeta_n`.

use crate::error::{require_nonnegative, require_positive, CoreError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GronwallInput {
    pub k: f64,
    pub xi0: f64,
    /// `eta[i]` is `eta_i`, starting at `i = 0`.
    pub eta: Vec<f64>,
    /// `zeta[i]` is `zeta_i`; entry 0 is never read.
    pub zeta: Vec<f64>,
}

impl GronwallInput {
    pub fn validate(&self) -> Result<()> {
        require_positive("k", self.k)?;
        require_nonnegative("xi0", self.xi0)?;
        for &e in &self.eta {
            require_nonnegative("eta", e)?;
        }
        for &z in &self.zeta {
            require_nonnegative("zeta", z)?;
        }
        Ok(())
    }
}

/// Finite-horizon bound
/// `xi0 exp(sum_{i<n} k eta_i) + sum_{i=1}^{n} k zeta_i exp(sum_{j=i}^{n-1} k eta_j) + k zeta_n`.
pub fn gronwall_bound(inp: &GronwallInput, n: usize) -> Result<f64> {
    inp.validate()?;
    if n < 2 {
        return Err(CoreError::IndexWindow(format!("n = {n}, need n >= 2")));
    }
    if inp.eta.len() < n {
        return Err(CoreError::SequenceLength {
            name: "eta",
            len: inp.eta.len(),
            needed: n,
        });
    }
    if inp.zeta.len() < n + 1 {
        return Err(CoreError::SequenceLength {
            name: "zeta",
            len: inp.zeta.len(),
            needed: n + 1,
        });
    }
    let k = inp.k;
    // tail[i] = sum_{j=i}^{n-1} k eta_j
    let mut tail = vec![0.0; n + 1];
    for i in (0..n).rev() {
        tail[i] = tail[i + 1] + k * inp.eta[i];
    }
    let mut bound = inp.xi0 * tail[0].exp();
    for i in 1..=n {
        bound += k * inp.zeta[i] * tail[i].exp();
    }
    Ok(bound + k * inp.zeta[n])
}

/// Index window `n1 < n_star`, `n1 + n2 + 1 <= n_star` of the uniform lemma.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformWindow {
    pub n1: usize,
    pub n2: usize,
    pub n_star: usize,
}

impl UniformWindow {
    pub fn new(n1: usize, n2: usize, n_star: usize) -> Result<Self> {
        if n2 == 0 || n1 == 0 {
            return Err(CoreError::IndexWindow(format!(
                "n1 = {n1}, n2 = {n2} must be positive"
            )));
        }
        if n1 >= n_star || n1 + n2 + 1 > n_star {
            return Err(CoreError::IndexWindow(format!(
                "need n1 < n_star and n1 + n2 + 1 <= n_star (n1 = {n1}, n2 = {n2}, n_star = {n_star})"
            )));
        }
        Ok(Self { n1, n2, n_star })
    }

    /// Indices `n` at which the bound applies.
    pub fn valid_range(&self) -> std::ops::RangeInclusive<usize> {
        (self.n1 + self.n2 + 1)..=self.n_star
    }

    /// Largest `sum_{n=n'}^{n'+n2} k seq_n` over `n1 <= n' <= n_star - n2`.
    ///
    /// Produces the tightest admissible `a1`, `a2`, `a3` from known sequences.
    pub fn max_window_sum(&self, k: f64, seq: &[f64]) -> Result<f64> {
        if seq.len() < self.n_star + 1 {
            return Err(CoreError::SequenceLength {
                name: "window sequence",
                len: seq.len(),
                needed: self.n_star + 1,
            });
        }
        let mut best = f64::NEG_INFINITY;
        for start in self.n1..=(self.n_star - self.n2) {
            let s: f64 = seq[start..=(start + self.n2)].iter().map(|v| k * v).sum();
            best = best.max(s);
        }
        Ok(best)
    }
}

/// Uniform bound `(a3 / (k n2) + a2) exp(a1)`, independent of the start value.
pub fn uniform_gronwall_bound(
    window: UniformWindow,
    a1: f64,
    a2: f64,
    a3: f64,
    k: f64,
) -> Result<f64> {
    // re-check: fields are public
    let w = UniformWindow::new(window.n1, window.n2, window.n_star)?;
    require_positive("k", k)?;
    require_nonnegative("a1", a1)?;
    require_nonnegative("a2", a2)?;
    require_nonnegative("a3", a3)?;
    Ok((a3 / (k * w.n2 as f64) + a2) * a1.exp())
}

//! Per-step ledger rows, inequality checks and CSV output.

use std::collections::BTreeMap;
use std::io::Write;

/// One inequality evaluation: `margin = RHS - LHS`, `scale` = largest term magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub margin: f64,
    pub scale: f64,
}

impl Check {
    pub fn new(lhs: &[f64], rhs: &[f64]) -> Self {
        let margin = rhs.iter().sum::<f64>() - lhs.iter().sum::<f64>();
        let scale = lhs.iter().chain(rhs).fold(0.0_f64, |m, x| m.max(x.abs()));
        Self { margin, scale }
    }

    /// `margin / scale`, or the bare margin when every term vanishes.
    pub fn normalized(&self) -> f64 {
        if self.margin == f64::INFINITY {
            // an overflowed (infinite) bound holds trivially
            1.0
        } else if self.scale > 0.0 {
            self.margin / self.scale
        } else {
            self.margin
        }
    }

    pub fn holds(&self, rel_tol: f64) -> bool {
        self.margin >= -rel_tol * self.scale
    }
}

/// Relative tolerance for per-step and bound checks.
pub const STEP_TOL: f64 = 1e-10;
/// Relative tolerance for checks built from running sums.
pub const CUMULATIVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerRow {
    /// Index of the newly computed state `u_{n+1}`.
    pub step_index: usize,
    pub t: f64,
    pub l2_sq: f64,
    pub grad_sq: f64,
    /// `||(u_{n+1}, u_n)||_G^2`
    pub g_norm_sq: f64,
    /// `||(u_{n+1}, u_n)||_H^2`; NaN without a certificate.
    pub h_norm_sq: f64,
    pub dissipation_sq: f64,
    /// `||(grad u_{n+1}, grad u_n)||_G^2`
    pub a_n: f64,
    pub stab_eq1: Check,
    pub gstab_nse1: Check,
    pub l2bound0: Option<Check>,
    pub h1_ineq2: Option<Check>,
    pub solver_iters: usize,
    pub solver_residual: f64,

    // extra columns
    pub beta_l2_sq: f64,
    pub beta_grad_sq: f64,
    /// `||f(t_beta)||^2`
    pub forcing_sq: f64,
    /// `||grad u_n||^2` of the previous state.
    pub prev_grad_sq: f64,
    /// `G_new - G_old + diss + nu dt ||grad u_beta||^2 - dt (f(t_beta), u_beta)`; zero up to solver error.
    pub energy_law_residual: f64,
    pub diff1_l2_sq: f64,
    pub diff1_grad_sq: f64,
    pub diff2_l2_sq: f64,
    pub diff2_grad_sq: f64,
    pub l2bound0_closed: Option<Check>,
    pub k2_bound: Option<Check>,
    pub rho0_ball: Option<Check>,
    pub stab_l2_3: Option<Check>,
    pub un1_l2h1: Option<Check>,
    pub k3_bound: Option<Check>,
    pub rho2_bound: Option<Check>,
}

impl LedgerRow {
    /// Every check present in this row, with its name and tolerance.
    pub fn checks(&self) -> Vec<(&'static str, Check, f64)> {
        let mut out = vec![
            ("stab_eq1", self.stab_eq1, STEP_TOL),
            ("gstab_nse1", self.gstab_nse1, STEP_TOL),
        ];
        let opt = [
            ("l2bound0", self.l2bound0, STEP_TOL),
            ("h1_ineq2", self.h1_ineq2, STEP_TOL),
            ("l2bound0_closed", self.l2bound0_closed, STEP_TOL),
            ("k2_bound", self.k2_bound, STEP_TOL),
            ("rho0_ball", self.rho0_ball, STEP_TOL),
            ("stability_l2_3", self.stab_l2_3, CUMULATIVE_TOL),
            ("un1_l2h1", self.un1_l2h1, CUMULATIVE_TOL),
            ("k3_bound", self.k3_bound, STEP_TOL),
            ("rho2_bound", self.rho2_bound, STEP_TOL),
        ];
        out.extend(opt.into_iter().filter_map(|(n, c, t)| c.map(|c| (n, c, t))));
        out
    }
}

const OPTIONAL_CHECKS: [&str; 7] = [
    "l2bound0_closed",
    "k2_bound",
    "rho0_ball",
    "stability_l2_3",
    "un1_l2h1",
    "k3_bound",
    "rho2_bound",
];

/// Column names in output order.
pub fn csv_columns() -> Vec<String> {
    let mut c: Vec<String> = [
        "step_index",
        "t",
        "l2_sq",
        "grad_sq",
        "g_norm_sq",
        "h_norm_sq",
        "dissipation_sq",
        "A_n",
        "stab_eq1_margin",
        "gstab_nse1_margin",
        "l2bound0_margin",
        "h1_ineq2_margin",
        "solver_iters",
        "solver_residual",
        "beta_l2_sq",
        "beta_grad_sq",
        "forcing_sq",
        "prev_grad_sq",
        "energy_law_residual",
        "diff1_l2_sq",
        "diff1_grad_sq",
        "diff2_l2_sq",
        "diff2_grad_sq",
        "stab_eq1_scale",
        "gstab_nse1_scale",
        "l2bound0_scale",
        "h1_ineq2_scale",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for name in OPTIONAL_CHECKS {
        c.push(format!("{name}_margin"));
        c.push(format!("{name}_scale"));
    }
    c
}

/// Round-trip formatting: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn opt_margin(c: Option<Check>) -> String {
    c.map_or(String::new(), |c| fmt_f64(c.margin))
}

fn opt_scale(c: Option<Check>) -> String {
    c.map_or(String::new(), |c| fmt_f64(c.scale))
}

impl LedgerRow {
    pub fn csv_fields(&self) -> Vec<String> {
        let mut f = vec![
            self.step_index.to_string(),
            fmt_f64(self.t),
            fmt_f64(self.l2_sq),
            fmt_f64(self.grad_sq),
            fmt_f64(self.g_norm_sq),
            fmt_f64(self.h_norm_sq),
            fmt_f64(self.dissipation_sq),
            fmt_f64(self.a_n),
            fmt_f64(self.stab_eq1.margin),
            fmt_f64(self.gstab_nse1.margin),
            opt_margin(self.l2bound0),
            opt_margin(self.h1_ineq2),
            self.solver_iters.to_string(),
            fmt_f64(self.solver_residual),
            fmt_f64(self.beta_l2_sq),
            fmt_f64(self.beta_grad_sq),
            fmt_f64(self.forcing_sq),
            fmt_f64(self.prev_grad_sq),
            fmt_f64(self.energy_law_residual),
            fmt_f64(self.diff1_l2_sq),
            fmt_f64(self.diff1_grad_sq),
            fmt_f64(self.diff2_l2_sq),
            fmt_f64(self.diff2_grad_sq),
            fmt_f64(self.stab_eq1.scale),
            fmt_f64(self.gstab_nse1.scale),
            opt_scale(self.l2bound0),
            opt_scale(self.h1_ineq2),
        ];
        for c in [
            self.l2bound0_closed,
            self.k2_bound,
            self.rho0_ball,
            self.stab_l2_3,
            self.un1_l2h1,
            self.k3_bound,
            self.rho2_bound,
        ] {
            f.push(opt_margin(c));
            f.push(opt_scale(c));
        }
        f
    }
}

/// Writes `# key=value` header lines, the column header and all rows.
pub fn write_ledger_csv<W: Write>(mut w: W, header: &[(String, String)], rows: &[LedgerRow]) -> std::io::Result<()> {
    for (k, v) in header {
        writeln!(w, "# {k}={v}")?;
    }
    writeln!(w, "{}", csv_columns().join(","))?;
    for r in rows {
        writeln!(w, "{}", r.csv_fields().join(","))?;
    }
    Ok(())
}

/// Worst observed margin of one named inequality over a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSummary {
    pub checked: usize,
    pub violations: usize,
    pub tol: f64,
    pub worst_normalized: f64,
    pub worst: Check,
    pub worst_step: usize,
}

impl CheckSummary {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckTracker {
    map: BTreeMap<&'static str, CheckSummary>,
}

impl CheckTracker {
    pub fn record(&mut self, row: &LedgerRow) {
        for (name, c, tol) in row.checks() {
            let e = self.map.entry(name).or_insert(CheckSummary {
                checked: 0,
                violations: 0,
                tol,
                worst_normalized: f64::INFINITY,
                worst: c,
                worst_step: row.step_index,
            });
            e.checked += 1;
            if !c.holds(tol) {
                e.violations += 1;
            }
            let nrm = c.normalized();
            // NaN margins count as worst
            if nrm < e.worst_normalized || nrm.is_nan() && !e.worst_normalized.is_nan() {
                e.worst_normalized = nrm;
                e.worst = c;
                e.worst_step = row.step_index;
            }
        }
    }

    pub fn summaries(&self) -> &BTreeMap<&'static str, CheckSummary> {
        &self.map
    }

    pub fn get(&self, name: &str) -> Option<&CheckSummary> {
        self.map.get(name)
    }

    pub fn total_violations(&self) -> usize {
        self.map.values().map(|s| s.violations).sum()
    }
}

//! Whole-run driver: bootstrap, time loop, cumulative ledger checks, manifest.

use dln_core::bounds::k3;
use dln_core::{
    build_certificate, g_norm_sq_from_norms, h1_constants, kappa_constants, l2_constants, max_timestep,
    CertificateInput, DlnCoefficients, H1Constants, H1Inputs, HCertificate, Kappas, L2Constants, ThetaParam,
};
use dln_spectral::{ForcingSpec, SpectralOps, TorusGrid, VelocityField, C_OMEGA_TORUS};

use crate::error::{Result, StepperError};
use crate::ledger::{Check, CheckTracker, LedgerRow};
use crate::solver::SolverPolicy;
use crate::step::{StepState, Stepper};

/// How `u_1` is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    ImplicitMidpoint,
    /// A known `u_1`, e.g. from a manufactured solution.
    Exact(VelocityField),
}

impl Start {
    pub fn name(&self) -> &'static str {
        match self {
            Self::ImplicitMidpoint => "implicit-midpoint",
            Self::Exact(_) => "exact",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub grid: TorusGrid,
    pub theta: f64,
    pub nu: f64,
    pub dt: f64,
    /// Number of DLN steps after the start-up step; the last state is `u_{steps+1}`.
    pub steps: usize,
    pub forcing: ForcingSpec,
    pub u0: VelocityField,
    pub start: Start,
    pub policy: SolverPolicy,
    /// Window length `r` of the uniform H1 bound; `None` skips `rho2`.
    pub window_r: Option<f64>,
    pub c_omega: f64,
    /// Allow `dt >= C_dt`; certificate-based checks are then skipped.
    pub diagnostic: bool,
    /// BlowUp ceiling as a multiple of the reference energy.
    pub blowup_factor: f64,
}

impl SimulationConfig {
    /// Defaults for everything except the physical setup.
    pub fn new(grid: TorusGrid, theta: f64, nu: f64, dt: f64, steps: usize, forcing: ForcingSpec, u0: VelocityField) -> Self {
        Self {
            grid,
            theta,
            nu,
            dt,
            steps,
            forcing,
            u0,
            start: Start::ImplicitMidpoint,
            policy: SolverPolicy::default(),
            window_r: None,
            c_omega: C_OMEGA_TORUS,
            diagnostic: false,
            blowup_factor: 1e6,
        }
    }
}

/// Constants and worst margins of a run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub bootstrap: &'static str,
    pub bootstrap_iters: usize,
    pub bootstrap_residual: f64,
    pub policy: SolverPolicy,
    pub lambda1: f64,
    pub c_dt: f64,
    pub admissible: bool,
    pub cert: Option<HCertificate>,
    pub l2: Option<L2Constants>,
    pub kappas: Option<Kappas>,
    pub h1: Option<H1Constants>,
    /// Why `h1` is missing, if it is.
    pub h1_note: Option<String>,
    /// `dt < min{C_dt, K6, rho3}`; gates the `rho2` check.
    pub rho2_hypothesis: bool,
    pub ceiling: f64,
    pub g_initial: f64,
    pub h_initial: f64,
    pub a_initial: f64,
    pub steps_done: usize,
    pub checks: CheckTracker,
}

impl RunSummary {
    /// Flat `key=value` pairs for manifests and CSV headers (checks excluded).
    pub fn constants(&self) -> Vec<(String, String)> {
        use crate::ledger::fmt_f64;
        let mut kv: Vec<(String, String)> = vec![
            ("bootstrap".into(), self.bootstrap.into()),
            ("bootstrap_iters".into(), self.bootstrap_iters.to_string()),
            ("bootstrap_residual".into(), fmt_f64(self.bootstrap_residual)),
            ("solver_mode".into(), self.policy.mode.name().into()),
            ("solver_tol".into(), fmt_f64(self.policy.tol)),
            ("solver_max_iter".into(), self.policy.max_iter.to_string()),
            ("lambda1".into(), fmt_f64(self.lambda1)),
            ("C_dt".into(), fmt_f64(self.c_dt)),
            ("admissible".into(), self.admissible.to_string()),
            ("ceiling".into(), fmt_f64(self.ceiling)),
            ("G_initial".into(), fmt_f64(self.g_initial)),
            ("H_initial".into(), fmt_f64(self.h_initial)),
            ("A_initial".into(), fmt_f64(self.a_initial)),
        ];
        let mut push = |k: &str, v: f64| kv.push((k.to_string(), fmt_f64(v)));
        if let Some(c) = &self.cert {
            for (k, v) in c.to_key_values() {
                if k != "theta" {
                    push(k, v);
                }
            }
        }
        if let Some(l2) = &self.l2 {
            push("f_inf", l2.f_inf);
            push("K1", l2.k1);
            push("K2", l2.k2);
            push("rho0", l2.rho0);
            push("T_star", l2.t_star);
            push("hat_C_h", l2.hat_c_h);
        }
        if let Some(k) = &self.kappas {
            push("kappa1", k.kappa1);
            push("kappa2", k.kappa2);
            push("kappa3", k.kappa3);
            push("kappa4", k.kappa4);
        }
        if let Some(h) = &self.h1 {
            push("r", h.r);
            push("C_Omega", h.c_omega);
            push("K3_horizon", h.k3);
            push("K4", h.k4);
            push("K5", h.k5);
            push("K6", h.k6);
            push("ln_K5", h.ln_k5);
            push("ln_K6", h.ln_k6);
            push("rho1", h.rho1);
            push("ln_rho1", h.ln_rho1);
            push("rho2", h.rho2);
            push("rho3", h.rho3);
            push("ln_rho3", h.ln_rho3);
            push("uniform_dt_limit", h.uniform_dt_limit());
            kv.push(("rho1_note".into(), dln_core::bounds::RHO1_POWER_NOTE.into()));
        }
        if let Some(n) = &self.h1_note {
            kv.push(("h1_note".into(), n.clone()));
        }
        kv.push(("rho2_hypothesis".into(), self.rho2_hypothesis.to_string()));
        kv
    }
}

#[derive(Debug)]
pub struct SimulationOutput {
    pub rows: Vec<LedgerRow>,
    pub summary: RunSummary,
    /// Last successfully computed pair.
    pub final_state: Option<StepState>,
    /// Set when the time loop stopped early; `rows` then holds the partial ledger.
    pub failure: Option<StepperError>,
}

/// Running sums for the cumulative inequalities (starting index `i = 1`).
struct Accumulators {
    /// `sum ||grad u_{n,beta}||^2`
    beta_grad: f64,
    /// `sum_{j} ||grad u_{j+1}||^2`
    grad_next: f64,
    /// `sum theta/2 ||u_{j+1}-u_j||^2 + (1-theta)/4 ||u_{j+1}-u_{j-1}||^2`
    l2_diffs: f64,
    /// `sum beta1/2 ||grad(u_{j+1}-u_j)||^2 + beta0/2 ||grad(u_{j+1}-u_{j-1})||^2`
    grad_diffs: f64,
}

struct Context {
    coeffs: DlnCoefficients,
    nu: f64,
    dt: f64,
    lambda1: f64,
    f_inf: f64,
    g1: f64,
    grad_u0: f64,
    grad_u1: f64,
    l2: Option<L2Constants>,
    kappas: Option<Kappas>,
    k3_g: f64,
    a1: f64,
    c_dt: f64,
    h1: Option<H1Constants>,
    rho2_hypothesis: bool,
    cert: Option<HCertificate>,
    h1_initial: f64,
}

impl Context {
    fn fill(&self, row: &mut LedgerRow, acc: &Accumulators) {
        let big_n = row.step_index as f64;
        let (nu, dt, lam) = (self.nu, self.dt, self.lambda1);
        let f2 = self.f_inf * self.f_inf;
        let steps = big_n - 1.0; // N - i with i = 1

        row.stab_l2_3 = Some(Check::new(
            &[nu * dt * acc.beta_grad],
            &[2.0 * self.g1, steps * dt * f2 / (nu * lam)],
        ));

        if let (Some(cert), Some(l2)) = (&self.cert, &self.l2) {
            let e1 = 1.0 + cert.epsilon;
            let h1_decay = self.h1_initial * e1.powf(-(big_n - 1.0));
            row.l2bound0_closed = Some(Check::new(&[row.h_norm_sq], &[h1_decay, l2.forcing_floor()]));
            row.k2_bound = Some(Check::new(&[row.l2_sq.sqrt()], &[l2.k2]));
            if (big_n - 1.0) * dt > l2.t_star {
                row.rho0_ball = Some(Check::new(&[row.l2_sq], &[2.0 * l2.rho0]));
            }

            let [b0, b1, _] = self.coeffs.beta;
            let tb = self.coeffs.two_beta2_minus_one();
            let bsq = (b0 * b0 + b1 * b1).powi(2);
            let k2_4 = l2.k2.powi(4);
            let w_prev = b0 / 2.0 + tb / 8.0;
            let lhs = [
                dt * nu * tb / 8.0 * acc.grad_next,
                row.g_norm_sq,
                dt * nu * (0.25 * row.grad_sq + w_prev * row.prev_grad_sq),
                acc.l2_diffs,
                nu * dt * acc.grad_diffs,
            ];
            let rhs = [
                (1.0 + k2_4 * bsq / (nu.powi(4) * tb.powi(3))) * self.g1,
                dt * nu * (0.25 * self.grad_u1 + w_prev * self.grad_u0),
                steps * dt / (nu * tb * lam) * (2.0 + k2_4 * bsq / (2.0 * nu.powi(4) * tb * tb)) * f2,
            ];
            row.un1_l2h1 = Some(Check::new(&lhs, &rhs));
        }

        if let Some(k) = &self.kappas {
            let bound = k3(self.k3_g, self.a1, self.f_inf, (big_n - 1.0) * dt, k.kappa1, k.kappa2, nu, self.c_dt);
            row.k3_bound = Some(Check::new(&[row.a_n], &[bound]));
        }
        if let (Some(h1), Some(l2)) = (&self.h1, &self.l2) {
            if self.rho2_hypothesis && (big_n - 2.0) * dt > l2.t_star + h1.r {
                row.rho2_bound = Some(Check::new(&[row.a_n], &[h1.rho2]));
            }
        }
    }
}

pub fn run_simulation(config: &SimulationConfig) -> Result<SimulationOutput> {
    run_simulation_with(config, |_, _| {})
}

/// Like [`run_simulation`], calling `observer` after every step (snapshots, progress).
pub fn run_simulation_with(
    config: &SimulationConfig,
    mut observer: impl FnMut(&StepState, &LedgerRow),
) -> Result<SimulationOutput> {
    let grid = config.grid;
    if config.u0.grid() != &grid {
        return Err(StepperError::Config("initial condition grid differs from run grid".into()));
    }
    if let Start::Exact(u1) = &config.start {
        if u1.grid() != &grid {
            return Err(StepperError::Config("u1 grid differs from run grid".into()));
        }
    }
    if !(config.blowup_factor > 1.0) {
        return Err(StepperError::Config("blowup_factor must exceed 1".into()));
    }
    let theta = ThetaParam::new(config.theta)?;
    let coeffs = DlnCoefficients::new(theta);
    let ops = SpectralOps::new(grid);
    let mut stepper = Stepper::new(ops, coeffs, config.nu, config.dt, config.forcing.clone(), config.policy)?;
    let lambda1 = stepper.lambda1;
    let c_dt = max_timestep(theta, config.nu, lambda1)?;
    let cert = match CertificateInput::new(theta, config.nu, lambda1, config.dt) {
        Ok(inp) => Some(build_certificate(&inp)?),
        Err(_) if config.diagnostic => None,
        Err(e) => return Err(e.into()),
    };
    let f_inf = config.forcing.f_inf();
    let u0 = &config.u0;
    let reference = u0.norms().l2_sq.max((f_inf / (config.nu * lambda1)).powi(2));

    let (state, bootstrap_iters, bootstrap_residual) = match &config.start {
        Start::ImplicitMidpoint => stepper.bootstrap_first_step(u0)?,
        Start::Exact(u1) => (StepState::new(u0.clone(), u1.clone(), config.dt, 1)?, 0, 0.0),
    };
    let n0 = state.u_prev.norms();
    let n1 = state.u_curr.norms();
    let ceiling = config.blowup_factor * reference.max(n1.l2_sq);
    stepper.ceiling = ceiling;
    let g1 = g_norm_sq_from_norms(n1.l2_sq, n0.l2_sq, theta);
    let a1 = g_norm_sq_from_norms(n1.grad_sq, n0.grad_sq, theta);

    let l2 = match &cert {
        Some(c) => Some(l2_constants(c, n0.l2_sq.sqrt(), n1.l2_sq.sqrt(), f_inf, config.nu, lambda1)?),
        None => None,
    };
    let kappas = match &l2 {
        Some(l) => Some(kappa_constants(theta, config.nu, config.c_omega, l.k2, l.rho0)?),
        None => None,
    };
    stepper.kappa2 = kappas.map(|k| k.kappa2);
    let (h1, h1_note) = match (&cert, &l2, config.window_r) {
        (Some(c), Some(l), Some(r)) => {
            let inp = H1Inputs {
                dt: config.dt,
                a1,
                r,
                c_omega: config.c_omega,
                horizon: config.steps as f64 * config.dt,
            };
            match h1_constants(c, l, &inp) {
                Ok(h) => (Some(h), None),
                Err(e) => (None, Some(e.to_string())),
            }
        }
        (_, _, None) => (None, Some("no window r configured".to_string())),
        _ => (None, Some("no certificate (inadmissible dt)".to_string())),
    };
    let rho2_hypothesis = h1.as_ref().is_some_and(|h| config.dt < h.uniform_dt_limit());
    let h_initial = cert.as_ref().map_or(f64::NAN, |c| c.h_norm_sq(n1.l2_sq, n0.l2_sq));
    stepper.cert = cert;

    let ctx = Context {
        coeffs,
        nu: config.nu,
        dt: config.dt,
        lambda1,
        f_inf,
        g1,
        grad_u0: n0.grad_sq,
        grad_u1: n1.grad_sq,
        l2,
        kappas,
        k3_g: g1,
        a1,
        c_dt,
        h1,
        rho2_hypothesis,
        cert,
        h1_initial: h_initial,
    };
    let mut summary = RunSummary {
        bootstrap: config.start.name(),
        bootstrap_iters,
        bootstrap_residual,
        policy: config.policy,
        lambda1,
        c_dt,
        admissible: cert.is_some(),
        cert,
        l2,
        kappas,
        h1,
        h1_note,
        rho2_hypothesis,
        ceiling,
        g_initial: g1,
        h_initial,
        a_initial: a1,
        steps_done: 0,
        checks: CheckTracker::default(),
    };

    let [b0, b1, _] = coeffs.beta;
    let t = theta.get();
    let mut acc = Accumulators {
        beta_grad: 0.0,
        grad_next: 0.0,
        l2_diffs: 0.0,
        grad_diffs: 0.0,
    };
    let mut rows = Vec::with_capacity(config.steps);
    let mut state = state;
    let mut failure = None;
    for _ in 0..config.steps {
        match stepper.advance(&state) {
            Ok((next, mut row)) => {
                acc.beta_grad += row.beta_grad_sq;
                acc.grad_next += row.grad_sq;
                acc.l2_diffs += 0.5 * t * row.diff1_l2_sq + 0.25 * (1.0 - t) * row.diff2_l2_sq;
                acc.grad_diffs += 0.5 * b1 * row.diff1_grad_sq + 0.5 * b0 * row.diff2_grad_sq;
                ctx.fill(&mut row, &acc);
                summary.checks.record(&row);
                observer(&next, &row);
                rows.push(row);
                state = next;
                summary.steps_done += 1;
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    Ok(SimulationOutput {
        rows,
        summary,
        final_state: Some(state),
        failure,
    })
}

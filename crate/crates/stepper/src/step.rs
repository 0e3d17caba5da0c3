use dln_core::{g_norm_sq_from_norms, DlnCoefficients, HCertificate, InnerProductSpace};
use dln_spectral::{ForcingSpec, SpectralOps, VelocityField};

use crate::error::{Result, StepperError};
use crate::ledger::{Check, LedgerRow};
use crate::solver::{solve_stage, SolverPolicy};

/// The pair `(u_{n-1}, u_n)` at time `t_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepState {
    pub u_prev: VelocityField,
    pub u_curr: VelocityField,
    pub t_curr: f64,
    pub step_index: usize,
}

impl StepState {
    pub fn new(u_prev: VelocityField, u_curr: VelocityField, t_curr: f64, step_index: usize) -> Result<Self> {
        u_prev.check_compatible(&u_curr)?;
        if !t_curr.is_finite() {
            return Err(StepperError::Config(format!("t_curr = {t_curr} must be finite")));
        }
        Ok(Self {
            u_prev,
            u_curr,
            t_curr,
            step_index,
        })
    }
}

/// Everything fixed for the duration of a run.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub ops: SpectralOps,
    pub coeffs: DlnCoefficients,
    pub nu: f64,
    pub dt: f64,
    pub forcing: ForcingSpec,
    pub policy: SolverPolicy,
    pub lambda1: f64,
    /// Present when `dt` is admissible; enables the H-norm columns.
    pub cert: Option<HCertificate>,
    /// Enables the `h1_ineq2` check.
    pub kappa2: Option<f64>,
    /// `||u||^2` above which the run is aborted.
    pub ceiling: f64,
}

fn lin(terms: &[(f64, &VelocityField)]) -> VelocityField {
    VelocityField::linear_combination(terms).expect("fields share a grid")
}

impl Stepper {
    pub fn new(
        ops: SpectralOps,
        coeffs: DlnCoefficients,
        nu: f64,
        dt: f64,
        forcing: ForcingSpec,
        policy: SolverPolicy,
    ) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(StepperError::Config(format!("nu = {nu} must be > 0")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(StepperError::Config(format!("dt = {dt} must be > 0")));
        }
        if forcing.grid() != ops.grid() {
            return Err(StepperError::Config("forcing and solver grids differ".into()));
        }
        policy.validate()?;
        let lambda1 = ops.grid().stokes_lambda1();
        Ok(Self {
            ops,
            coeffs,
            nu,
            dt,
            forcing,
            policy,
            lambda1,
            cert: None,
            kappa2: None,
            ceiling: f64::INFINITY,
        })
    }

    fn beta_time(&self, t_curr: f64) -> f64 {
        self.coeffs.beta_time(t_curr - self.dt, t_curr, t_curr + self.dt)
    }

    /// Projected residual of
    /// `(1/dt) sum alpha_l u_{n-1+l} + nu A u_beta + B(u_beta, u_beta) - f(t_beta)`
    /// for the candidate `u_{n+1}`.
    pub fn stage_residual(&self, candidate: &VelocityField, state: &StepState) -> Result<VelocityField> {
        candidate.check_compatible(&state.u_curr)?;
        candidate.check_compatible(&state.u_prev)?;
        let [a0, a1, a2] = self.coeffs.alpha;
        let [b0, b1, b2] = self.coeffs.beta;
        let ub = lin(&[(b0, &state.u_prev), (b1, &state.u_curr), (b2, candidate)]);
        let mut r = lin(&[
            (a0 / self.dt, &state.u_prev),
            (a1 / self.dt, &state.u_curr),
            (a2 / self.dt, candidate),
        ]);
        r.axpy(self.nu, &ub.map_modes(|k2| k2))?;
        r.axpy(1.0, &self.ops.advection(&ub, &ub)?)?;
        r.axpy(-1.0, &self.forcing.eval(self.beta_time(state.t_curr)))?;
        Ok(r)
    }

    /// One DLN step `(u_{n-1}, u_n) -> (u_n, u_{n+1})` with its ledger row.
    ///
    /// Only the per-step checks are filled in; the cumulative and long-time
    /// checks are the caller's business (see [`crate::run_simulation`]).
    pub fn advance(&self, state: &StepState) -> Result<(StepState, LedgerRow)> {
        let c = &self.coeffs;
        let [a0, a1, a2] = c.alpha;
        let [b0, b1, b2] = c.beta;
        let (up, uc) = (&state.u_prev, &state.u_curr);
        up.check_compatible(uc)?;
        let next_index = state.step_index + 1;

        let t_beta = self.beta_time(state.t_curr);
        let f_beta = self.forcing.eval(t_beta);
        let gamma = self.dt * b2 / a2;
        // rhs = gamma f - (b2/a2) [a1 u_n + a0 u_{n-1} - (a2/b2)(b1 u_n + b0 u_{n-1})]
        let k = b2 / a2;
        let mut rhs = lin(&[(-k * a1 + b1, uc), (-k * a0 + b0, up)]);
        rhs.axpy(gamma, &f_beta)?;
        // guess: u_beta of the linear extrapolation u_{n+1} ~ 2u_n - u_{n-1}
        let guess = lin(&[(b1 + 2.0 * b2, uc), (b0 - b2, up)]);
        let sol = solve_stage(&self.ops, gamma, self.nu, &rhs, &guess, &self.policy, next_index)?;
        let un = lin(&[(1.0 / b2, &sol.w), (-b1 / b2, uc), (-b0 / b2, up)]);

        let n_new = un.norms();
        if !(n_new.l2_sq <= self.ceiling) {
            return Err(StepperError::BlowUp {
                step: next_index,
                energy: n_new.l2_sq,
                ceiling: self.ceiling,
            });
        }
        let n_cur = uc.norms();
        let theta = c.theta;
        let g_new = g_norm_sq_from_norms(n_new.l2_sq, n_cur.l2_sq, theta);
        let g_old = g_norm_sq_from_norms(n_cur.l2_sq, up.norm_sq(), theta);
        let a_new = g_norm_sq_from_norms(n_new.grad_sq, n_cur.grad_sq, theta);
        let a_old = g_norm_sq_from_norms(n_cur.grad_sq, up.norms().grad_sq, theta);
        let [d0, d1, d2] = c.dissip;
        let diss = lin(&[(d2, &un), (d1, uc), (d0, up)]).norm_sq();
        let ub = lin(&[(b0, up), (b1, uc), (b2, &un)]);
        let nb = ub.norms();
        let f_sq = f_beta.norm_sq();
        let work = f_beta.dot(&ub)?;
        let (nu, dt, lam) = (self.nu, self.dt, self.lambda1);
        let f_inf2 = self.forcing.f_inf().powi(2);

        let stab_eq1 = Check::new(
            &[g_new, -g_old, diss, 0.5 * nu * dt * lam * nb.l2_sq],
            &[dt * f_inf2 / (2.0 * nu * lam)],
        );
        let gstab_nse1 = Check::new(
            &[g_new, -g_old, diss, 0.5 * nu * dt * nb.grad_sq],
            &[dt * f_sq / (2.0 * nu * lam)],
        );
        let energy_law_residual = g_new - g_old + diss + nu * dt * nb.grad_sq - dt * work;

        let (h_norm_sq, l2bound0) = match &self.cert {
            Some(cert) => {
                let h_new = cert.h_norm_sq(n_new.l2_sq, n_cur.l2_sq);
                let h_old = cert.h_norm_sq(n_cur.l2_sq, up.norm_sq());
                let e1 = 1.0 + cert.epsilon;
                let chk = Check::new(&[h_new], &[h_old / e1, dt * f_inf2 / (e1 * 2.0 * nu * lam)]);
                (h_new, Some(chk))
            }
            None => (f64::NAN, None),
        };
        let h1_ineq2 = self
            .kappa2
            .map(|k2| Check::new(&[a_new], &[k2 * a_old, dt * f_inf2 / nu]));

        let d1f = lin(&[(1.0, &un), (-1.0, uc)]).norms();
        let d2f = lin(&[(1.0, &un), (-1.0, up)]).norms();

        let row = LedgerRow {
            step_index: next_index,
            t: state.t_curr + dt,
            l2_sq: n_new.l2_sq,
            grad_sq: n_new.grad_sq,
            g_norm_sq: g_new,
            h_norm_sq,
            dissipation_sq: diss,
            a_n: a_new,
            stab_eq1,
            gstab_nse1,
            l2bound0,
            h1_ineq2,
            solver_iters: sol.iters,
            solver_residual: sol.residual,
            beta_l2_sq: nb.l2_sq,
            beta_grad_sq: nb.grad_sq,
            forcing_sq: f_sq,
            prev_grad_sq: n_cur.grad_sq,
            energy_law_residual,
            diff1_l2_sq: d1f.l2_sq,
            diff1_grad_sq: d1f.grad_sq,
            diff2_l2_sq: d2f.l2_sq,
            diff2_grad_sq: d2f.grad_sq,
            l2bound0_closed: None,
            k2_bound: None,
            rho0_ball: None,
            stab_l2_3: None,
            un1_l2h1: None,
            k3_bound: None,
            rho2_bound: None,
        };
        let next = StepState {
            u_prev: state.u_curr.clone(),
            u_curr: un,
            t_curr: state.t_curr + dt,
            step_index: next_index,
        };
        Ok((next, row))
    }

    /// `u_1` from one implicit-midpoint step of size `dt` starting at `t = 0`.
    pub fn bootstrap_first_step(&self, u0: &VelocityField) -> Result<(StepState, usize, f64)> {
        u0.check_compatible(&VelocityField::zeros(*self.ops.grid()))?;
        let gamma = 0.5 * self.dt;
        let mut rhs = u0.clone();
        rhs.axpy(gamma, &self.forcing.eval(0.5 * self.dt))?;
        let sol = solve_stage(&self.ops, gamma, self.nu, &rhs, u0, &self.policy, 1)?;
        let u1 = lin(&[(2.0, &sol.w), (-1.0, u0)]);
        let state = StepState::new(u0.clone(), u1, self.dt, 1)?;
        Ok((state, sol.iters, sol.residual))
    }
}

/// Free-function form of [`Stepper::stage_residual`].
pub fn stage_residual(stepper: &Stepper, candidate: &VelocityField, state: &StepState) -> Result<VelocityField> {
    stepper.stage_residual(candidate, state)
}

/// Free-function form of [`Stepper::advance`].
pub fn advance(stepper: &Stepper, state: &StepState) -> Result<(StepState, LedgerRow)> {
    stepper.advance(state)
}

/// Free-function form of [`Stepper::bootstrap_first_step`].
pub fn bootstrap_first_step(stepper: &Stepper, u0: &VelocityField) -> Result<StepState> {
    stepper.bootstrap_first_step(u0).map(|(s, _, _)| s)
}

//! Long-time L2 and H1 bound constants.
//!
//! All constants use the *effective* `C_h` / `C_eps` carried by a
//! certificate. Quantities built from nested exponentials (`K5`, `K6`,
//! `rho1`, `rho3`) are assembled in log space; the stored values may
//! therefore legitimately be `+inf` or `0.0` when the exact value falls
//! outside the f64 range.

use crate::certificate::{max_timestep, HCertificate};
use crate::coefficients::{h11_floor, DlnCoefficients, ThetaParam};
use crate::error::{require_nonnegative, require_positive, CoreError, Result};
use crate::identities::g_norm_sq_from_norms;

/// Written into run manifests next to `rho1`.
pub const RHO1_POWER_NOTE: &str = "rho1 transcribed literally with 4*rho0^4*(beta0^2+beta1^2)^2/(nu^4*(2beta2-1)^3); \
the analogous finite-time bound groups this term as K2^4*(beta0^2+beta1^2)^2/(2*nu^4*(2beta2-1)^2), \
so the rho0 power may be a misprint";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Constants {
    pub theta: ThetaParam,
    pub nu: f64,
    pub lambda1: f64,
    pub f_inf: f64,
    pub norm_u0: f64,
    pub norm_u1: f64,
    pub k1: f64,
    pub k2: f64,
    pub rho0: f64,
    /// `+inf` when the forcing vanishes, clamped at 0 when the data already lie inside the ball.
    pub t_star: f64,
    pub c_h_eff: f64,
    pub c_eps_eff: f64,
    pub hat_c_h: f64,
}

impl L2Constants {
    /// `||(u1, u0)||_G^2`
    pub fn g_initial(&self) -> f64 {
        g_norm_sq_from_norms(self.norm_u1 * self.norm_u1, self.norm_u0 * self.norm_u0, self.theta)
    }

    /// Steady part of the H-norm bound: `C_eps f^2 / (2 nu^2 lambda1^2)`.
    pub fn forcing_floor(&self) -> f64 {
        self.c_eps_eff * self.f_inf * self.f_inf / (2.0 * (self.nu * self.lambda1).powi(2))
    }
}

pub fn l2_constants(
    cert: &HCertificate,
    norm_u0: f64,
    norm_u1: f64,
    f_inf: f64,
    nu: f64,
    lambda1: f64,
) -> Result<L2Constants> {
    require_nonnegative("norm_u0", norm_u0)?;
    require_nonnegative("norm_u1", norm_u1)?;
    require_nonnegative("f_inf", f_inf)?;
    require_positive("nu", nu)?;
    require_positive("lambda1", lambda1)?;
    let theta = cert.theta;
    let t = theta.get();
    let c_h = cert.c_h_eff();
    let c_eps = cert.c_eps_eff();
    let floor = h11_floor(theta);
    let ic = norm_u1 * norm_u1 + norm_u0 * norm_u0;
    let nl2 = (nu * lambda1).powi(2);

    let k1 = c_h * ic + c_eps * f_inf * f_inf / (2.0 * nl2);
    let k2 = (k1 / floor).sqrt();
    let hat_c_h = c_h / floor;
    let rho0 = c_eps * f_inf * f_inf / (nl2 * t * t * t * (1.0 - 0.5 * t * (1.0 - t)));
    let t_star = if rho0 == 0.0 {
        f64::INFINITY
    } else {
        let v = 4.0 * c_eps / (nu * lambda1) * (hat_c_h * ic / rho0).ln();
        if v > 0.0 {
            v
        } else {
            0.0
        }
    };
    Ok(L2Constants {
        theta,
        nu,
        lambda1,
        f_inf,
        norm_u0,
        norm_u1,
        k1,
        k2,
        rho0,
        t_star,
        c_h_eff: c_h,
        c_eps_eff: c_eps,
        hat_c_h,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kappas {
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    pub kappa4: f64,
}

pub fn kappa_constants(theta: ThetaParam, nu: f64, c_omega: f64, k2: f64, rho0: f64) -> Result<Kappas> {
    require_positive("nu", nu)?;
    require_positive("C_Omega", c_omega)?;
    require_nonnegative("K2", k2)?;
    require_nonnegative("rho0", rho0)?;
    let t = theta.get();
    let w = 2.0 - t * t;
    let den = nu * nu * (2.0 - t).powi(2) * (1.0 + t);
    Ok(Kappas {
        kappa1: 27.0 * w * c_omega * c_omega * k2 * k2 / (16.0 * nu.powi(3)),
        kappa2: 3.0 + 8.0 * w * k2 * k2 / den,
        kappa3: 27.0 * w * c_omega * c_omega * rho0 / (8.0 * nu.powi(3)),
        kappa4: 3.0 + 16.0 * w * rho0 / den,
    })
}

/// Finite-window H1 bound `K3` as a function of its arguments.
///
/// `g_l2 = ||(u1, u0)||_G^2`, `a1 = ||(grad u1, grad u0)||_G^2`, `elapsed = (n - 1) dt`.
#[allow(clippy::too_many_arguments)]
pub fn k3(
    g_l2: f64,
    a1: f64,
    f_inf: f64,
    elapsed: f64,
    kappa1: f64,
    kappa2: f64,
    nu: f64,
    c_dt: f64,
) -> f64 {
    let f2 = f_inf * f_inf;
    let inner = 2.0 * g_l2 + elapsed * f2 / nu;
    (a1 + kappa1 * c_dt * f2 / (nu * nu) * inner + elapsed * f2 / (2.0 * nu))
        * (kappa1 * (kappa2 + 1.0) / nu * inner).exp()
}

/// Inputs of [`h1_constants`] beyond the certificate and the L2 constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H1Inputs {
    pub dt: f64,
    /// `||(grad u1, grad u0)||_G^2` of the actual starting pair.
    pub a1: f64,
    /// Window length `r > 5 C_dt`.
    pub r: f64,
    /// Laplacian/H2 equivalence constant; exactly 1 on the periodic torus.
    pub c_omega: f64,
    /// Model time at which the stored `k3` is evaluated.
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H1Constants {
    pub kappas: Kappas,
    pub c_dt: f64,
    pub c_omega: f64,
    pub r: f64,
    pub a1: f64,
    /// `K3` at `H1Inputs::horizon`.
    pub k3: f64,
    pub k4: f64,
    pub k5: f64,
    pub k6: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub ln_k5: f64,
    pub ln_k6: f64,
    pub ln_rho1: f64,
    pub ln_rho3: f64,
    g_l2: f64,
    f_inf: f64,
    nu: f64,
}

impl H1Constants {
    /// `K3` for `elapsed = (n - 1) dt`.
    pub fn k3_at(&self, elapsed: f64) -> f64 {
        k3(
            self.g_l2,
            self.a1,
            self.f_inf,
            elapsed,
            self.kappas.kappa1,
            self.kappas.kappa2,
            self.nu,
            self.c_dt,
        )
    }

    pub fn uniform_dt_limit(&self) -> f64 {
        self.c_dt.min(self.k6).min(self.rho3)
    }
}

pub fn h1_constants(cert: &HCertificate, l2: &L2Constants, inp: &H1Inputs) -> Result<H1Constants> {
    let theta = cert.theta;
    let t = theta.get();
    let nu = l2.nu;
    let lambda1 = l2.lambda1;
    require_positive("dt", inp.dt)?;
    require_nonnegative("A1", inp.a1)?;
    require_nonnegative("horizon", inp.horizon)?;
    let c_dt = max_timestep(theta, nu, lambda1)?;
    if !(inp.r > 5.0 * c_dt) || !inp.r.is_finite() {
        return Err(CoreError::WindowTooShort {
            r: inp.r,
            min: 5.0 * c_dt,
        });
    }
    let kappas = kappa_constants(theta, nu, inp.c_omega, l2.k2, l2.rho0)?;
    let Kappas {
        kappa1: k1,
        kappa2: k2,
        kappa3: k3c,
        kappa4: k4c,
    } = kappas;
    let co = DlnCoefficients::new(theta);
    let [b0, b1, _] = co.beta;
    let tbm1 = co.two_beta2_minus_one();
    let bsq = (b0 * b0 + b1 * b1).powi(2);
    let r = inp.r;
    let f2 = l2.f_inf * l2.f_inf;
    let rho0 = l2.rho0;
    let c_eps = l2.c_eps_eff;

    let k3_h = k3(l2.g_initial(), inp.a1, l2.f_inf, inp.horizon, k1, k2, nu, c_dt);

    let k4 = if l2.t_star.is_infinite() {
        f64::INFINITY
    } else {
        (1.0 + t) * rho0 / (2.0 * l2.hat_c_h) * (nu * lambda1 * l2.t_star / (4.0 * c_eps)).exp()
            + (l2.t_star + 2.0 * c_dt) * f2 / nu
    };

    let pref5 = inp.a1 + k1 * c_dt * f2 * k4 / (nu * nu) + (l2.t_star + 2.0 * c_dt) * f2 / (2.0 * nu);
    let expo5 = k1 * (k2 + 1.0) * k4 / nu;
    let ln_k5 = if expo5.is_nan() { 0.0 } else { expo5 } + pref5.ln();

    let e3 = k3c * (k4c + 1.0) / nu * (2.0 * rho0 + r * f2 / (nu * lambda1));
    let ln_win = (tbm1 * r / (4.0 * (4.0 + 3.0 * t))).ln();
    let ln_k6 = ln_win - ln_k5 + e3;

    let brace1 = 1.0
        + 16.0 * rho0 / (nu * tbm1 * r) * (1.0 + 4.0 * rho0.powi(4) * bsq / (nu.powi(4) * tbm1.powi(3)))
        + 32.0 / (nu * nu * tbm1 * tbm1 * lambda1)
            * (1.0 + rho0 * rho0 * bsq / (nu.powi(4) * tbm1 * tbm1))
            * f2
        + k3c * c_dt / (nu * nu) * f2 * (2.0 * rho0 + r * f2 / (nu * lambda1))
        + r * f2 / (2.0 * nu);
    let ln_rho1 = brace1.ln() + 2.0 * e3;
    let rho1 = ln_rho1.exp();

    let inner2 = 2.0 * (1.0 + t) * rho0 + r * f2 / nu;
    let rho2 = (rho1 + k3c * c_dt * f2 / (nu * nu) * inner2 + r * f2 / (2.0 * nu))
        * (2.0 * k3c * (k4c + 1.0) / nu * inner2).exp();
    let ln_rho3 = ln_win - ln_rho1 + e3;

    Ok(H1Constants {
        kappas,
        c_dt,
        c_omega: inp.c_omega,
        r,
        a1: inp.a1,
        k3: k3_h,
        k4,
        k5: ln_k5.exp(),
        k6: ln_k6.exp(),
        rho1,
        rho2,
        rho3: ln_rho3.exp(),
        ln_k5,
        ln_k6,
        ln_rho1,
        ln_rho3,
        g_l2: l2.g_initial(),
        f_inf: l2.f_inf,
        nu,
    })
}

/// `min{C_dt, K6, rho3}`; `K6` and `rho3` may be `+inf`.
pub fn uniform_timestep_limit(c_dt: f64, k6: f64, rho3: f64) -> Result<f64> {
    for (name, v) in [("C_dt", c_dt), ("K6", k6), ("rho3", rho3)] {
        if !(v > 0.0) {
            return Err(CoreError::Domain {
                name,
                value: v,
                requirement: "> 0",
            });
        }
    }
    Ok(c_dt.min(k6).min(rho3))
}

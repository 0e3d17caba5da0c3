//! Construction of the strengthened H-matrix energy decomposition.
//!
//! Under the step limit `dt < C_dt`, the left-hand side of the per-step
//! energy inequality can be rewritten as
//!
//! ```text
//! (1 + eps) ||(u_{n+1}, u_n)||_H^2 - ||(u_n, u_{n-1})||_H^2 + ||a u_{n+1} + b u_n + c u_{n-1}||^2
//! ```
//!
//! with `H = diag(h11, h22)`. [`build_certificate`] solves the six
//! coefficient-matching equations in closed form:
//!
//! 1. `x` from the linear equation left after squaring the `(u_{n+1}, u_n)` row,
//! 2. `b` and `a + c` as the roots of `X^2 - sqrt(x) X + E`, `b` taking the `-` root,
//! 3. `a` and `c` from the `(u_{n+1}, u_{n-1})` row, `c` taking the `+` root,
//! 4. `h22` from the `||u_{n-1}||^2` row, `h11` as the larger root of its quadratic,
//! 5. `eps` from the `||u_n||^2` row.
//!
//! Only the `b + (a + c) = +sqrt(x)` sign case is built; one valid solution
//! suffices. [`system_residuals`] re-evaluates all six rows from the finished
//! certificate and is the correctness oracle for the whole pipeline.

use crate::coefficients::{h11_floor, h22_floor, DlnCoefficients, ThetaParam};
use crate::compensated::DoubleDouble as Dd;
use crate::error::{require_positive, CoreError, Discriminant, Result};

/// Largest admissible step (exclusive):
/// `C_dt = min{8 theta (1 - theta^2) / (8 - 6 theta^2 + 3 theta^4), 2 (1 - theta)} / (nu lambda1)`.
pub fn max_timestep(theta: ThetaParam, nu: f64, lambda1: f64) -> Result<f64> {
    require_positive("nu", nu)?;
    require_positive("lambda1", lambda1)?;
    Ok(max_scaled_step(theta) / (nu * lambda1))
}

/// Admissible bound on the dimensionless product `nu * lambda1 * dt`.
pub fn max_scaled_step(theta: ThetaParam) -> f64 {
    let t = theta.get();
    let t2 = t * t;
    let first = 8.0 * t * (1.0 - t2) / (8.0 - 6.0 * t2 + 3.0 * t2 * t2);
    let second = 2.0 * (1.0 - t);
    first.min(second)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateInput {
    pub theta: ThetaParam,
    pub nu: f64,
    pub lambda1: f64,
    pub dt: f64,
}

impl CertificateInput {
    /// Validates all parameters, including `dt < C_dt`.
    pub fn new(theta: ThetaParam, nu: f64, lambda1: f64, dt: f64) -> Result<Self> {
        require_positive("dt", dt)?;
        let max_dt = max_timestep(theta, nu, lambda1)?;
        if dt >= max_dt {
            return Err(CoreError::InadmissibleTimestep {
                dt,
                max_dt,
                theta: theta.get(),
                nu,
                lambda1,
            });
        }
        Ok(Self {
            theta,
            nu,
            lambda1,
            dt,
        })
    }

    /// `s = nu * lambda1 * dt`; the certificate depends on the inputs only through `(theta, s)`.
    pub fn scaled_step(&self) -> f64 {
        self.nu * self.lambda1 * self.dt
    }

    pub fn max_dt(&self) -> f64 {
        max_scaled_step(self.theta) / (self.nu * self.lambda1)
    }
}

/// All intermediate and final quantities of the H-matrix construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HCertificate {
    pub theta: ThetaParam,
    /// `nu * lambda1 * dt`
    pub scaled_step: f64,
    /// `b (a + c)`
    pub e: f64,
    pub f: f64,
    /// `(a + b + c)^2`
    pub x: f64,
    /// `x - 4E`
    pub disc_outer: f64,
    pub disc_inner: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub h11: f64,
    pub h22: f64,
    pub epsilon: f64,
    /// `s beta1^2/2 - theta^3/2 - b^2`, negative.
    pub b_coef: f64,
    /// `s beta2^2/2 + (1 + theta)(2 + theta - theta^2)/8 - a^2`, positive.
    pub c_coef: f64,
}

impl HCertificate {
    /// Effective `C_h := max(h11, h22)`.
    pub fn c_h_eff(&self) -> f64 {
        self.h11.max(self.h22)
    }

    /// Effective `C_eps := nu lambda1 dt / eps`.
    pub fn c_eps_eff(&self) -> f64 {
        self.scaled_step / self.epsilon
    }

    /// The implicit split parameter `mu = 1 - 2x/s`, reported for diagnostics only.
    pub fn mu(&self) -> f64 {
        1.0 - 2.0 * self.x / self.scaled_step
    }

    pub fn h_norm_sq(&self, u_sq: f64, v_sq: f64) -> f64 {
        self.h11 * u_sq + self.h22 * v_sq
    }

    /// Flat `key=value` lines in a fixed order.
    pub fn to_key_values(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("theta", self.theta.get()),
            ("scaled_step", self.scaled_step),
            ("E", self.e),
            ("F", self.f),
            ("x", self.x),
            ("disc_outer", self.disc_outer),
            ("disc_inner", self.disc_inner),
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("h11", self.h11),
            ("h22", self.h22),
            ("epsilon", self.epsilon),
            ("B", self.b_coef),
            ("C", self.c_coef),
            ("mu", self.mu()),
            ("C_h_eff", self.c_h_eff()),
            ("C_eps_eff", self.c_eps_eff()),
        ]
    }
}

pub fn build_certificate(input: &CertificateInput) -> Result<HCertificate> {
    // re-check: the struct fields are public
    let input = CertificateInput::new(input.theta, input.nu, input.lambda1, input.dt)?;
    certificate_for_scaled_step(input.theta, input.scaled_step())
}

/// Pipeline on the dimensionless step `s = nu lambda1 dt`.
pub fn certificate_for_scaled_step(theta: ThetaParam, s: f64) -> Result<HCertificate> {
    require_positive("nu*lambda1*dt", s)?;
    let limit = max_scaled_step(theta);
    if s >= limit {
        return Err(CoreError::InadmissibleTimestep {
            dt: s,
            max_dt: limit,
            theta: theta.get(),
            nu: 1.0,
            lambda1: 1.0,
        });
    }

    let t = Dd::from(theta.get());
    let one = Dd::from(1.0);
    let two = Dd::from(2.0);
    let t2 = t * t;
    let b0 = (two - t - t2) * 0.25;
    let b1 = t2 * 0.5;
    let b2 = (two + t - t2) * 0.25;
    let a1sq = t * (one - t2) * 0.5;
    let sd = Dd::from(s);

    let e = sd * b1 * (b2 + b0) * 0.5 - a1sq;
    let f = sd * b1 * (b2 + b0) * 0.5 + sd * b2 * b0 * 2.0;
    let g = (sd * b1 * (b2 - b0)).square();
    let num = (e * f * 4.0 - g).square();
    let den = (e - f) * (g - e.square() * 4.0) * 4.0;
    let x = num / den;
    let disc_outer = x - e * 4.0;
    if !(disc_outer.to_f64() > 0.0) {
        return Err(CoreError::NegativeDiscriminant {
            which: Discriminant::Outer,
            value: disc_outer.to_f64(),
        });
    }
    let sqrt_x = x.sqrt();
    let sqrt_d = disc_outer.sqrt();
    let a_plus_c = (sqrt_x + sqrt_d) * 0.5;
    let ac = sd * b2 * b0 * 0.5 + a1sq * 0.25;
    let disc_inner = (sqrt_x + sqrt_d).square() * 0.25 - ac * 4.0;
    if !(disc_inner.to_f64() > 0.0) {
        return Err(CoreError::NegativeDiscriminant {
            which: Discriminant::Inner,
            value: disc_inner.to_f64(),
        });
    }
    let sqrt_di = disc_inner.sqrt();
    let b = ((sqrt_x - sqrt_d) * 0.5).to_f64();
    let c = ((a_plus_c + sqrt_di) * 0.5).to_f64();
    let a = ((a_plus_c - sqrt_di) * 0.5).to_f64();

    let th = theta.get();
    let coeffs = DlnCoefficients::new(theta);
    let [beta0, beta1, beta2] = coeffs.beta;
    let h22 = c * c + (1.0 - th) * (2.0 - th - th * th) / 8.0 - 0.5 * s * beta0 * beta0;
    let b_coef = 0.5 * s * beta1 * beta1 - 0.5 * th * th * th - b * b;
    let c_coef = 0.5 * s * beta2 * beta2 + (1.0 + th) * (2.0 + th - th * th) / 8.0 - a * a;
    let root = (b_coef * b_coef + 4.0 * c_coef * h22).sqrt();
    // larger root; b_coef < 0 so no cancellation
    let h11 = 0.5 * (root - b_coef);
    // eq. for eps rewritten with B + C - h22 = s/2 - x to avoid cancelling
    let x_f = x.to_f64();
    let slack = (Dd::from(0.5 * s) - x).to_f64();
    let epsilon = 2.0 * slack / (root + 2.0 * h22 - b_coef);

    Ok(HCertificate {
        theta,
        scaled_step: s,
        e: e.to_f64(),
        f: f.to_f64(),
        x: x_f,
        disc_outer: disc_outer.to_f64(),
        disc_inner: disc_inner.to_f64(),
        a,
        b,
        c,
        h11,
        h22,
        epsilon,
        b_coef,
        c_coef,
    })
}

/// Row residuals (`LHS - RHS`) of the six coefficient-matching equations.
///
/// Rows: `||u_{n+1}||^2`, `||u_n||^2`, `||u_{n-1}||^2`, `(u_{n+1}, u_n)`,
/// `(u_{n+1}, u_{n-1})`, `(u_n, u_{n-1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemResiduals {
    pub rows: [f64; 6],
    /// Largest absolute term appearing in any row.
    pub scale: f64,
}

impl SystemResiduals {
    pub fn max_abs(&self) -> f64 {
        self.rows.iter().fold(0.0_f64, |m, r| m.max(r.abs()))
    }

    pub fn max_relative(&self) -> f64 {
        self.max_abs() / self.scale
    }
}

/// Evaluates the system from the certificate fields alone.
pub fn system_residuals(cert: &HCertificate, input: &CertificateInput) -> SystemResiduals {
    let t = input.theta.get();
    let s = input.scaled_step();
    let co = DlnCoefficients::new(input.theta);
    let [b0, b1, b2] = co.beta;
    let a1sq = co.dissip[1] * co.dissip[1];
    let HCertificate {
        a,
        b,
        c,
        h11,
        h22,
        epsilon: eps,
        ..
    } = *cert;

    let rows_terms: [(f64, f64); 6] = [
        (
            (1.0 + eps) * h11 + a * a,
            (1.0 + t) * (2.0 + t - t * t) / 8.0 + 0.5 * s * b2 * b2,
        ),
        (
            (1.0 + eps) * h22 - h11 + b * b,
            0.5 * s * b1 * b1 - 0.5 * t * t * t,
        ),
        (
            c * c - h22,
            (1.0 - t) * (t * t + t - 2.0) / 8.0 + 0.5 * s * b0 * b0,
        ),
        (2.0 * a * b, s * b2 * b1 - a1sq),
        (2.0 * a * c, s * b2 * b0 + 0.5 * a1sq),
        (2.0 * b * c, s * b1 * b0 - a1sq),
    ];
    let mut rows = [0.0; 6];
    for (r, (lhs, rhs)) in rows.iter_mut().zip(rows_terms) {
        *r = lhs - rhs;
    }
    let scale = [
        (1.0 + eps) * h11,
        (1.0 + eps) * h22,
        h11,
        h22,
        a * a,
        b * b,
        c * c,
        (2.0 * a * b).abs(),
        (2.0 * a * c).abs(),
        (2.0 * b * c).abs(),
        a1sq,
        s * b2 * b2,
    ]
    .into_iter()
    .fold(0.0_f64, f64::max);
    SystemResiduals { rows, scale }
}

/// Upper bound on `a^2 + b^2 + c^2` valid for every admissible step.
fn abc_sq_bound(t: f64) -> f64 {
    (1.0 - t) * (9.0 * t * t + 9.0 * t + 14.0) / 12.0
}

fn theta_only_parts(theta: ThetaParam) -> (f64, f64, f64) {
    let t = theta.get();
    let co = DlnCoefficients::new(theta);
    let s_abc = abc_sq_bound(t);
    let b_max = s_abc + 0.5 * t * t * t;
    let c_max = (1.0 - t) * co.beta[2] * co.beta[2] + (1.0 + t) * (2.0 + t - t * t) / 8.0;
    let h22_max = s_abc + (1.0 - t) * (2.0 - t - t * t) / 8.0;
    (b_max, c_max, h22_max)
}

/// A bound `C_eps(theta)` with `1/eps < C_eps(theta) / (nu lambda1 dt)` for every admissible step.
pub fn c_eps_theta_bound(theta: ThetaParam) -> f64 {
    let (b_max, c_max, h22_max) = theta_only_parts(theta);
    4.0 * (b_max * b_max + 4.0 * c_max * h22_max).sqrt()
}

/// A bound `C_h(theta) > max(h11, h22)` for every admissible step.
pub fn c_h_theta_bound(theta: ThetaParam) -> f64 {
    let (b_max, c_max, h22_max) = theta_only_parts(theta);
    (b_max + (c_max * h22_max).sqrt()).max(h22_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundFlags {
    pub h11_above_floor: bool,
    pub h22_above_floor: bool,
    pub eps_positive: bool,
    pub eps_below_four: bool,
    pub inv_eps_above_quarter: bool,
    pub inv_eps_below_c_eps: bool,
    pub h_below_c_h: bool,
    pub x_below_quarter_step: bool,
    pub e_negative: bool,
    pub f_positive: bool,
}

impl BoundFlags {
    pub fn all_pass(&self) -> bool {
        self.entries().iter().all(|(_, ok)| *ok)
    }

    pub fn entries(&self) -> [(&'static str, bool); 10] {
        [
            ("h11_above_floor", self.h11_above_floor),
            ("h22_above_floor", self.h22_above_floor),
            ("eps_positive", self.eps_positive),
            ("eps_below_four", self.eps_below_four),
            ("inv_eps_above_quarter", self.inv_eps_above_quarter),
            ("inv_eps_below_c_eps", self.inv_eps_below_c_eps),
            ("h_below_c_h", self.h_below_c_h),
            ("x_below_quarter_step", self.x_below_quarter_step),
            ("E_negative", self.e_negative),
            ("F_positive", self.f_positive),
        ]
    }
}

pub fn bound_flags(cert: &HCertificate, input: &CertificateInput) -> BoundFlags {
    let theta = input.theta;
    let s = input.scaled_step();
    let inv_eps = 1.0 / cert.epsilon;
    BoundFlags {
        h11_above_floor: cert.h11 > h11_floor(theta),
        h22_above_floor: cert.h22 > h22_floor(theta),
        eps_positive: cert.epsilon > 0.0,
        eps_below_four: cert.epsilon < 4.0,
        inv_eps_above_quarter: inv_eps > 0.25,
        inv_eps_below_c_eps: inv_eps < c_eps_theta_bound(theta) / s,
        h_below_c_h: cert.c_h_eff() < c_h_theta_bound(theta),
        x_below_quarter_step: cert.x < 0.25 * s,
        e_negative: cert.e < 0.0,
        f_positive: cert.f > 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn th(t: f64) -> ThetaParam {
        ThetaParam::new(t).unwrap()
    }

    fn input(t: f64, dt: f64) -> CertificateInput {
        CertificateInput::new(th(t), 1.0, 1.0, dt).unwrap()
    }

    #[test]
    fn max_timestep_branches() {
        let half = max_timestep(th(0.5), 1.0, 1.0).unwrap();
        assert!((half - 48.0 / 107.0).abs() < 1e-15);
        let nine = max_timestep(th(0.9), 1.0, 1.0).unwrap();
        assert!((nine - 0.2).abs() < 1e-15);
        let near_one = max_timestep(th(1.0 - 1e-9), 1.0, 1.0).unwrap();
        assert!(near_one < 1e-8);
        assert!(max_timestep(th(0.5), 0.0, 1.0).is_err());
        assert!(max_timestep(th(0.5), 1.0, -1.0).is_err());
    }

    #[test]
    fn inadmissible_step_is_rejected() {
        let err = CertificateInput::new(th(0.5), 1.0, 1.0, 0.5).unwrap_err();
        match err {
            CoreError::InadmissibleTimestep { max_dt, .. } => {
                assert!((max_dt - 0.448598).abs() < 1e-6)
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(CertificateInput::new(th(0.5), 1.0, 1.0, 48.0 / 107.0).is_err());
        // tampered input struct is re-validated
        let bad = CertificateInput {
            theta: th(0.5),
            nu: 1.0,
            lambda1: 1.0,
            dt: 0.5,
        };
        assert!(build_certificate(&bad).is_err());
    }

    #[test]
    fn reference_point() {
        let inp = input(0.5, 0.2);
        let cert = build_certificate(&inp).unwrap();
        let res = system_residuals(&cert, &inp);
        assert!(res.max_relative() < 1e-12, "{res:?}");
        assert!(bound_flags(&cert, &inp).all_pass());
        assert!(cert.e < 0.0 && cert.f > 0.0);
        // values from an independent float evaluation of the closed forms
        assert!((cert.e + 0.1765625).abs() < 1e-15);
        assert!((cert.f - 0.08125).abs() < 1e-15);
        assert!((cert.x - 0.02564896912723).abs() < 1e-12);
        assert!((cert.h22 - 0.135135135135137).abs() < 1e-12);
        assert!((cert.epsilon - 0.157085328984747).abs() < 1e-11);
    }

    #[test]
    fn summed_system_identity() {
        for t in [0.1, 0.5, 0.9] {
            let inp = input(t, 0.7 * max_timestep(th(t), 1.0, 1.0).unwrap());
            let cert = build_certificate(&inp).unwrap();
            let s = inp.scaled_step();
            let sum = cert.a + cert.b + cert.c;
            assert!((sum * sum - cert.x).abs() <= 1e-12 * s);
            let lhs = cert.epsilon * (cert.h11 + cert.h22) + sum * sum;
            assert!((lhs - 0.5 * s).abs() <= 1e-12 * s, "theta={t}");
        }
    }

    #[test]
    fn h11_is_larger_quadratic_root_not_minus_b() {
        for t in [0.2, 0.5, 0.8] {
            let inp = input(t, 0.5 * max_timestep(th(t), 1.0, 1.0).unwrap());
            let cert = build_certificate(&inp).unwrap();
            let (bq, cq) = (cert.b_coef, cert.c_coef);
            let quad = cert.h11 * cert.h11 + bq * cert.h11 - cq * cert.h22;
            assert!(quad.abs() < 1e-14);
            let formula = 0.5 * (-bq + (bq * bq + 4.0 * cq * cert.h22).sqrt());
            assert!((formula - cert.h11).abs() < 1e-14);
            assert!(cert.h11 > -bq);
            assert!(-bq >= h11_floor(th(t)));
        }
    }

    #[test]
    fn perturbation_sensitivity() {
        let inp = input(0.5, 0.2);
        let cert = build_certificate(&inp).unwrap();
        let base = system_residuals(&cert, &inp);

        let mut bumped = cert;
        bumped.h11 += 1e-3;
        let r = system_residuals(&bumped, &inp);
        assert!((r.rows[1] - base.rows[1] + 1e-3).abs() < 1e-15);

        let mut flipped = cert;
        flipped.b = -cert.b;
        let r = system_residuals(&flipped, &inp);
        let rhs4 = 2.0 * cert.a * cert.b - base.rows[3];
        assert!((r.rows[3] - (-2.0 * cert.a * cert.b - rhs4)).abs() < 1e-15);
    }

    #[test]
    fn scaling_covariance() {
        let a = build_certificate(&CertificateInput::new(th(0.4), 1.0, 1.0, 0.1).unwrap()).unwrap();
        let b = build_certificate(&CertificateInput::new(th(0.4), 4.0, 1.0, 0.025).unwrap()).unwrap();
        assert_eq!(a, b);
        let c = build_certificate(&CertificateInput::new(th(0.4), 0.3, 2.0, 1.0 / 6.0).unwrap()).unwrap();
        assert!((a.epsilon - c.epsilon).abs() < 1e-13);
        assert!((a.h11 - c.h11).abs() < 1e-13);
    }

    #[test]
    fn tiny_step_limit() {
        let mut prev = f64::INFINITY;
        for dt in [1e-2, 1e-4, 1e-6, 1e-8] {
            let inp = input(0.5, dt);
            let cert = build_certificate(&inp).unwrap();
            assert!(cert.epsilon > 0.0 && cert.epsilon < prev);
            prev = cert.epsilon;
            assert!(system_residuals(&cert, &inp).max_relative() < 1e-10);
        }
        assert!(prev < 1e-7);
    }

    #[test]
    fn key_values_listing() {
        let cert = build_certificate(&input(0.5, 0.2)).unwrap();
        let kv = cert.to_key_values();
        assert_eq!(kv[0], ("theta", 0.5));
        assert!(kv.iter().any(|(k, v)| *k == "mu" && *v > 0.0 && *v < 1.0));
    }
}

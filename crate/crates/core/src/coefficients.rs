//! The one-parameter DLN family of two-step one-leg methods.
//!
//! For a step `y' = g(t, y)` the scheme reads
//!
//! ```text
//! a2 y_{n+1} + a1 y_n + a0 y_{n-1} = dt * g(sum b_l t_{n-1+l}, sum b_l y_{n-1+l})
//! ```
//!
//! with `alpha`/`beta` depending on a single parameter `theta in (0, 1)`.

use crate::error::{CoreError, Result};

/// Method parameter, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ThetaParam(f64);

impl ThetaParam {
    pub fn new(theta: f64) -> Result<Self> {
        if theta.is_finite() && theta > 0.0 && theta < 1.0 {
            Ok(Self(theta))
        } else {
            Err(CoreError::ThetaOutOfRange(theta))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for ThetaParam {
    type Error = CoreError;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl std::fmt::Display for ThetaParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Coefficients of one DLN member. Index `l` multiplies `y_{n-1+l}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DlnCoefficients {
    pub theta: ThetaParam,
    pub alpha: [f64; 3],
    pub beta: [f64; 3],
    /// Numerical-dissipation weights `a_l` of the G-stability identity.
    pub dissip: [f64; 3],
}

impl DlnCoefficients {
    pub fn new(theta: ThetaParam) -> Self {
        let t = theta.get();
        let alpha = [0.5 * (t - 1.0), -t, 0.5 * (t + 1.0)];
        let beta = [
            0.25 * (2.0 - t - t * t),
            0.5 * t * t,
            0.25 * (2.0 + t - t * t),
        ];
        let a1 = -(t * (1.0 - t * t)).sqrt() / std::f64::consts::SQRT_2;
        let dissip = [-0.5 * a1, a1, -0.5 * a1];
        Self {
            theta,
            alpha,
            beta,
            dissip,
        }
    }

    /// `2 beta_2 - 1 = theta (1 - theta) / 2`, strictly positive on `(0, 1)`.
    pub fn two_beta2_minus_one(&self) -> f64 {
        2.0 * self.beta[2] - 1.0
    }

    /// `a_1^2 = theta (1 - theta^2) / 2`.
    pub fn a1_sq(&self) -> f64 {
        let t = self.theta.get();
        0.5 * t * (1.0 - t * t)
    }

    /// Weights of the G-matrix: `((1 + theta)/4, (1 - theta)/4)`.
    pub fn g_weights(&self) -> (f64, f64) {
        g_weights(self.theta)
    }

    /// `sum_l beta_l t_{n-1+l}` for the uniform grid ending at `t_next`.
    pub fn beta_time(&self, t_prev: f64, t_curr: f64, t_next: f64) -> f64 {
        self.beta[0] * t_prev + self.beta[1] * t_curr + self.beta[2] * t_next
    }
}

/// Builds the coefficient set, rejecting `theta` outside `(0, 1)`.
pub fn make_coefficients(theta: f64) -> Result<DlnCoefficients> {
    Ok(DlnCoefficients::new(ThetaParam::new(theta)?))
}

pub(crate) fn g_weights(theta: ThetaParam) -> (f64, f64) {
    let t = theta.get();
    (0.25 * (1.0 + t), 0.25 * (1.0 - t))
}

/// Lower bound for `h11`: `theta^3/2 * [1 - theta(1 - theta)/2]`.
///
/// Also the constant relating the H-norm to `||u_N||^2` in the L2 bounds.
pub fn h11_floor(theta: ThetaParam) -> f64 {
    let t = theta.get();
    0.5 * t * t * t * (1.0 - 0.5 * t * (1.0 - t))
}

/// Lower bound for `h22`: `theta (1 - theta)^2 (1 + theta)(2 + theta) / 16`.
pub fn h22_floor(theta: ThetaParam) -> f64 {
    let t = theta.get();
    t * (1.0 - t) * (1.0 - t) * (1.0 + t) * (2.0 + t) / 16.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_half_values() {
        let c = make_coefficients(0.5).unwrap();
        assert_eq!(c.alpha, [-0.25, -0.5, 0.75]);
        assert_eq!(c.beta, [0.3125, 0.125, 0.5625]);
        assert!((c.dissip[1] + 0.4330127018922193).abs() < 1e-15);
        assert!((c.dissip[0] - 0.21650635094610965).abs() < 1e-15);
        assert_eq!(c.dissip[0], c.dissip[2]);
        assert!((c.two_beta2_minus_one() - 0.125).abs() < 1e-16);
    }

    #[test]
    fn endpoints_rejected() {
        for t in [0.0, 1.0, -0.1, 1.5, f64::NAN, f64::INFINITY] {
            let err = make_coefficients(t).unwrap_err();
            assert!(matches!(err, CoreError::ThetaOutOfRange(_)));
            assert!(err.to_string().contains("(0, 1)"));
        }
    }

    #[test]
    fn consistency_on_fine_grid() {
        for i in 1..1000 {
            let t = i as f64 / 1000.0;
            let c = make_coefficients(t).unwrap();
            let sa: f64 = c.alpha.iter().sum();
            let sb: f64 = c.beta.iter().sum();
            assert!(sa.abs() < 1e-14, "theta={t}");
            assert!((sb - 1.0).abs() < 1e-14, "theta={t}");
            assert!((c.two_beta2_minus_one() - 0.5 * t * (1.0 - t)).abs() < 1e-14);
            assert!((c.dissip[0] + 0.5 * c.dissip[1]).abs() < 1e-14);
            assert!((c.dissip[2] + 0.5 * c.dissip[1]).abs() < 1e-14);
            assert!((c.dissip[1] * c.dissip[1] - c.a1_sq()).abs() < 1e-14);
        }
    }

    #[test]
    fn scalar_g_identity_for_single_vector() {
        // alpha2*beta2 = (1+theta)/4 + a2^2
        for t in [0.1, 0.5, 0.9] {
            let c = make_coefficients(t).unwrap();
            let lhs = c.alpha[2] * c.beta[2];
            let rhs = 0.25 * (1.0 + t) + c.dissip[2] * c.dissip[2];
            assert!((lhs - rhs).abs() < 1e-15);
        }
    }
}

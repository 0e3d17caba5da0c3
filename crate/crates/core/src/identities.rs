//! G-norm and the three algebraic identities behind the energy estimates.
//!
//! Each identity is exposed as a raw residual `LHS - RHS`; its exact value is
//! zero, so what comes back is pure floating-point error. Callers choose the
//! tolerance.

use crate::coefficients::{g_weights, DlnCoefficients, ThetaParam};
use crate::error::Result;
use crate::space::InnerProductSpace;

/// Three consecutive states `(y_{n-1}, y_n, y_{n+1})` of one space.
#[derive(Debug, Clone)]
pub struct StateTriple<V> {
    pub prev: V,
    pub curr: V,
    pub next: V,
}

impl<V: InnerProductSpace> StateTriple<V> {
    pub fn new(prev: V, curr: V, next: V) -> Result<Self> {
        prev.check_compatible(&curr)?;
        prev.check_compatible(&next)?;
        Ok(Self { prev, curr, next })
    }

    fn combine(&self, w: [f64; 3]) -> Result<V> {
        V::linear_combination(&[(w[0], &self.prev), (w[1], &self.curr), (w[2], &self.next)])
    }

    /// `sum alpha_l y_{n-1+l}`
    pub fn alpha_combination(&self, c: &DlnCoefficients) -> Result<V> {
        self.combine(c.alpha)
    }

    /// `sum a_l y_{n-1+l}`, the numerical-dissipation combination.
    pub fn dissipation_combination(&self, c: &DlnCoefficients) -> Result<V> {
        self.combine(c.dissip)
    }
}

/// `y_{n,beta} = beta_0 y_{n-1} + beta_1 y_n + beta_2 y_{n+1}`.
pub fn combine_beta<V: InnerProductSpace>(triple: &StateTriple<V>, c: &DlnCoefficients) -> Result<V> {
    triple.combine(c.beta)
}

/// `||(u, v)||_G^2 = (1 + theta)/4 ||u||^2 + (1 - theta)/4 ||v||^2`.
pub fn g_norm_sq<V: InnerProductSpace>(u: &V, v: &V, theta: ThetaParam) -> Result<f64> {
    u.check_compatible(v)?;
    Ok(g_norm_sq_from_norms(u.norm_sq(), v.norm_sq(), theta))
}

/// G-norm from precomputed squared norms.
pub fn g_norm_sq_from_norms(u_sq: f64, v_sq: f64, theta: ThetaParam) -> f64 {
    let (w1, w2) = g_weights(theta);
    w1 * u_sq + w2 * v_sq
}

/// Residual of the G-stability identity
/// `(sum alpha y, y_beta) = G(y_{n+1}, y_n) - G(y_n, y_{n-1}) + ||sum a y||^2`.
pub fn g_stability_residual<V: InnerProductSpace>(
    triple: &StateTriple<V>,
    theta: ThetaParam,
) -> Result<f64> {
    let c = DlnCoefficients::new(theta);
    let lhs = triple
        .alpha_combination(&c)?
        .dot(&combine_beta(triple, &c)?)?;
    let g_new = g_norm_sq(&triple.next, &triple.curr, theta)?;
    let g_old = g_norm_sq(&triple.curr, &triple.prev, theta)?;
    let diss = triple.dissipation_combination(&c)?.norm_sq();
    Ok(lhs - (g_new - g_old + diss))
}

/// Residual of
/// `(sum alpha y, y_{n+1}) = G-difference + theta/2 ||y_{n+1} - y_n||^2 + (1 - theta)/4 ||y_{n+1} - y_{n-1}||^2`.
pub fn identity1_residual<V: InnerProductSpace>(
    triple: &StateTriple<V>,
    theta: ThetaParam,
) -> Result<f64> {
    let c = DlnCoefficients::new(theta);
    let t = theta.get();
    let lhs = triple.alpha_combination(&c)?.dot(&triple.next)?;
    let g_new = g_norm_sq(&triple.next, &triple.curr, theta)?;
    let g_old = g_norm_sq(&triple.curr, &triple.prev, theta)?;
    let d1 = V::linear_combination(&[(1.0, &triple.next), (-1.0, &triple.curr)])?.norm_sq();
    let d2 = V::linear_combination(&[(1.0, &triple.next), (-1.0, &triple.prev)])?.norm_sq();
    Ok(lhs - (g_new - g_old + 0.5 * t * d1 + 0.25 * (1.0 - t) * d2))
}

/// Residual of the `(y_beta, y_{n+1})` identity with leading coefficient `2 beta_2 - 1`.
pub fn identity2_residual<V: InnerProductSpace>(
    triple: &StateTriple<V>,
    theta: ThetaParam,
) -> Result<f64> {
    let c = DlnCoefficients::new(theta);
    let [b0, b1, _] = c.beta;
    let lhs = combine_beta(triple, &c)?.dot(&triple.next)?;
    let n_next = triple.next.norm_sq();
    let n_curr = triple.curr.norm_sq();
    let n_prev = triple.prev.norm_sq();
    let s1 = V::linear_combination(&[(1.0, &triple.next), (1.0, &triple.curr)])?.norm_sq();
    let s2 = V::linear_combination(&[(1.0, &triple.next), (1.0, &triple.prev)])?.norm_sq();
    let rhs = c.two_beta2_minus_one() * n_next
        + 0.5 * b1 * s1
        + 0.5 * b0 * s2
        + (0.5 * (b0 + b1) * n_next + 0.5 * b0 * n_curr)
        - (0.5 * (b0 + b1) * n_curr + 0.5 * b0 * n_prev);
    Ok(lhs - rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::CoreError;

    fn th(t: f64) -> ThetaParam {
        ThetaParam::new(t).unwrap()
    }

    #[test]
    fn combine_beta_unit_vectors() {
        let c = DlnCoefficients::new(th(0.5));
        let t = StateTriple::new(vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0])
            .unwrap();
        assert_eq!(combine_beta(&t, &c).unwrap(), vec![0.3125, 0.125, 0.5625]);
    }

    #[test]
    fn combine_beta_partition_of_unity() {
        let v = vec![0.3, -1.7, 2.5];
        for theta in [0.1, 0.5, 0.9] {
            let c = DlnCoefficients::new(th(theta));
            let t = StateTriple::new(v.clone(), v.clone(), v.clone()).unwrap();
            let w = combine_beta(&t, &c).unwrap();
            for (a, b) in w.iter().zip(&v) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn combine_beta_linearity() {
        let c = DlnCoefficients::new(th(0.37));
        let t = StateTriple::new(vec![1.0, 0.0], vec![0.0; 2], vec![0.0; 2]).unwrap();
        assert_eq!(combine_beta(&t, &c).unwrap(), vec![c.beta[0], 0.0]);
    }

    #[test]
    fn triple_rejects_mismatch() {
        let err = StateTriple::new(vec![0.0; 2], vec![0.0; 3], vec![0.0; 2]).unwrap_err();
        assert!(matches!(err, CoreError::DimensionMismatch { .. }));
        assert!(g_norm_sq(&vec![1.0], &vec![1.0, 2.0], th(0.5)).is_err());
    }

    #[test]
    fn g_norm_examples() {
        let u = vec![2.0, 0.0];
        let v = vec![0.0, 2.0];
        assert_eq!(g_norm_sq(&u, &v, th(0.5)).unwrap(), 2.0);
        assert_eq!(g_norm_sq(&vec![0.0; 2], &vec![0.0; 2], th(0.5)).unwrap(), 0.0);
        let t = 0.3;
        let got = g_norm_sq(&u, &vec![0.0; 2], th(t)).unwrap();
        assert!((got - 0.25 * (1.0 + t) * 4.0).abs() < 1e-15);
    }

    #[test]
    fn constant_sequence_residuals_vanish() {
        let v = vec![1.25, -0.5, 3.0, 0.125];
        for theta in [0.1, 0.5, 0.9] {
            let t = StateTriple::new(v.clone(), v.clone(), v.clone()).unwrap();
            assert!(g_stability_residual(&t, th(theta)).unwrap().abs() < 1e-14);
            assert!(identity1_residual(&t, th(theta)).unwrap().abs() < 1e-14);
            assert!(identity2_residual(&t, th(theta)).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn single_vector_case() {
        let t = StateTriple::new(vec![0.0], vec![0.0], vec![1.0]).unwrap();
        assert!(g_stability_residual(&t, th(0.5)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn identity1_middle_term_active() {
        // y_{n-1} = y_{n+1}, y_n = 0: only the theta/2 and G terms survive.
        let y = vec![0.7, -1.1];
        let t = StateTriple::new(y.clone(), vec![0.0, 0.0], y.clone()).unwrap();
        for theta in [0.2, 0.5, 0.8] {
            let r = identity1_residual(&t, th(theta)).unwrap();
            assert!(r.abs() < 1e-15, "theta={theta} r={r}");
            // hand expansion: lhs = (alpha2 + alpha0)|y|^2 = theta |y|^2
            let c = DlnCoefficients::new(th(theta));
            let lhs = (c.alpha[2] + c.alpha[0]) * y.norm_sq();
            assert!((lhs - theta * y.norm_sq()).abs() < 1e-15);
        }
    }
}

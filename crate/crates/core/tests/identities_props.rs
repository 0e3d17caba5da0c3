use dln_core::{
    g_norm_sq, g_stability_residual, identity1_residual, identity2_residual, make_coefficients,
    InnerProductSpace, StateTriple, ThetaParam,
};
use proptest::prelude::*;

fn vec_of(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, dim)
}

fn triple_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    prop::sample::select(vec![1usize, 4, 64, 517, 4096])
        .prop_flat_map(|d| (vec_of(d), vec_of(d), vec_of(d)))
}

// largest term appearing on either side of the identities
fn scale(t: &StateTriple<Vec<f64>>) -> f64 {
    let m = t.prev.norm_sq().max(t.curr.norm_sq()).max(t.next.norm_sq());
    (4.0 * m).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn identities_hold_to_roundoff((p, c, n) in triple_strategy(), theta in 0.001f64..0.999) {
        let th = ThetaParam::new(theta).unwrap();
        let t = StateTriple::new(p, c, n).unwrap();
        let s = scale(&t);
        prop_assert!(g_stability_residual(&t, th).unwrap().abs() <= 1e-12 * s);
        prop_assert!(identity1_residual(&t, th).unwrap().abs() <= 1e-12 * s);
        prop_assert!(identity2_residual(&t, th).unwrap().abs() <= 1e-12 * s);
    }

    #[test]
    fn g_norm_is_equivalent_to_sum_of_squares(u in vec_of(16), v in vec_of(16), theta in 0.001f64..0.999) {
        let th = ThetaParam::new(theta).unwrap();
        let g = g_norm_sq(&u, &v, th).unwrap();
        let lower = (0.25 * (1.0 - theta)) * (u.norm_sq() + v.norm_sq());
        prop_assert!(g >= lower * (1.0 - 1e-15));
        prop_assert!(g <= 0.5 * (u.norm_sq() + v.norm_sq()) * (1.0 + 1e-15));
    }

    #[test]
    fn coefficient_invariants(theta in 1e-6f64..(1.0 - 1e-6)) {
        let c = make_coefficients(theta).unwrap();
        prop_assert!(c.alpha.iter().sum::<f64>().abs() < 1e-14);
        prop_assert!((c.beta.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        prop_assert!(c.two_beta2_minus_one() > 0.0);
        prop_assert!((c.two_beta2_minus_one() - 0.5 * theta * (1.0 - theta)).abs() < 1e-14);
        prop_assert!((c.dissip[0] + 0.5 * c.dissip[1]).abs() < 1e-14);
        prop_assert_eq!(c.dissip[0], c.dissip[2]);
    }
}

#[test]
fn coefficient_grid_of_99() {
    for i in 1..=99 {
        let theta = i as f64 / 100.0;
        let c = make_coefficients(theta).unwrap();
        assert!(c.alpha.iter().sum::<f64>().abs() < 1e-14);
        assert!((c.beta.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((c.alpha[2] - 0.5 * (theta + 1.0)).abs() < 1e-15);
        assert!((c.beta[1] - 0.5 * theta * theta).abs() < 1e-15);
    }
}

#[test]
fn identity2_constant_sequence_matches_norm() {
    let v = vec![0.5, -2.0, 1.0];
    let th = ThetaParam::new(0.5).unwrap();
    let t = StateTriple::new(v.clone(), v.clone(), v.clone()).unwrap();
    assert!(identity2_residual(&t, th).unwrap().abs() < 1e-15);
    let c = make_coefficients(0.5).unwrap();
    assert_eq!(c.two_beta2_minus_one(), 0.125);
}

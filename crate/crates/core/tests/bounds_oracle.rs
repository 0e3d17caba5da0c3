use dln_core::bounds::k3;
use dln_core::{
    build_certificate, h1_constants, l2_constants, make_coefficients, max_timestep,
    uniform_timestep_limit, CertificateInput, H1Inputs, HCertificate, ThetaParam,
};

fn setup(theta: f64, nu: f64, dt: f64) -> (ThetaParam, HCertificate) {
    let th = ThetaParam::new(theta).unwrap();
    let c = build_certificate(&CertificateInput::new(th, nu, 1.0, dt).unwrap()).unwrap();
    (th, c)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

#[test]
fn l2_constants_match_direct_evaluation() {
    let (_, c) = setup(0.5, 1.0, 0.2);
    let l2 = l2_constants(&c, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
    let floor = 0.0625 * (1.0 - 0.125);
    let k1 = c.h11.max(c.h22) * 2.0 + (0.2 / c.epsilon) / 2.0;
    assert!(close(l2.k1, k1, 1e-14));
    assert!(close(l2.k2, (k1 / floor).sqrt(), 1e-14));
    let rho0 = (0.2 / c.epsilon) / (0.125 * (1.0 - 0.125));
    assert!(close(l2.rho0, rho0, 1e-14));
    let hat = c.h11.max(c.h22) / floor;
    assert!(close(l2.hat_c_h, hat, 1e-14));
    let ts = 4.0 * (0.2 / c.epsilon) * (hat * 2.0 / rho0).ln();
    if ts > 0.0 {
        assert!(close(l2.t_star, ts, 1e-12));
    } else {
        assert_eq!(l2.t_star, 0.0);
    }
}

/// Straight transcription without log-space assembly.
fn direct(theta: f64, nu: f64, lam: f64, c: &HCertificate, f: f64, u0: f64, u1: f64, a1: f64, r: f64) -> [f64; 7] {
    let co = make_coefficients(theta).unwrap();
    let (b0, b1, b2) = (co.beta[0], co.beta[1], co.beta[2]);
    let th = ThetaParam::new(theta).unwrap();
    let cdt = max_timestep(th, nu, lam).unwrap();
    let ch = c.h11.max(c.h22);
    let ce = c.scaled_step / c.epsilon;
    let fl = theta.powi(3) / 2.0 * (1.0 - theta * (1.0 - theta) / 2.0);
    let k1 = ch * (u0 * u0 + u1 * u1) + ce * f * f / (2.0 * nu * nu * lam * lam);
    let k2 = (k1 / fl).sqrt();
    let hat = ch / fl;
    let rho0 = ce * f * f / (nu * nu * lam * lam * theta.powi(3) * (1.0 - theta * (1.0 - theta) / 2.0));
    let ts = (4.0 * ce / (nu * lam) * (hat * (u0 * u0 + u1 * u1) / rho0).ln()).max(0.0);
    let q = nu * nu * (2.0 - theta).powi(2) * (1.0 + theta);
    let kap1 = 27.0 * (2.0 - theta * theta) * k2 * k2 / (16.0 * nu.powi(3));
    let kap2 = 3.0 + 8.0 * (2.0 - theta * theta) * k2 * k2 / q;
    let kap3 = 27.0 * (2.0 - theta * theta) * rho0 / (8.0 * nu.powi(3));
    let kap4 = 3.0 + 16.0 * (2.0 - theta * theta) * rho0 / q;
    let k4 = (1.0 + theta) * rho0 / (2.0 * hat) * (nu * lam * ts / (4.0 * ce)).exp() + (ts + 2.0 * cdt) / nu * f * f;
    let k5 = (a1 + kap1 * cdt * f * f * k4 / (nu * nu) + (ts + 2.0 * cdt) / (2.0 * nu) * f * f)
        * (kap1 * (kap2 + 1.0) * k4 / nu).exp();
    let e = (kap3 * (kap4 + 1.0) / nu * (2.0 * rho0 + r / (nu * lam) * f * f)).exp();
    let tb = 2.0 * b2 - 1.0;
    let k6 = tb * r / (4.0 * (4.0 + 3.0 * theta) * k5) * e;
    let bb = (b0 * b0 + b1 * b1).powi(2);
    let rho1 = (1.0
        + 16.0 * rho0 / (nu * tb * r) * (1.0 + 4.0 * rho0.powi(4) * bb / (nu.powi(4) * tb.powi(3)))
        + 32.0 / (nu * nu * tb * tb * lam) * (1.0 + rho0 * rho0 * bb / (nu.powi(4) * tb * tb)) * f * f
        + kap3 * cdt / (nu * nu) * f * f * (2.0 * rho0 + r / (nu * lam) * f * f)
        + r * f * f / (2.0 * nu))
        * e
        * e;
    let g = 2.0 * (1.0 + theta) * rho0 + r / nu * f * f;
    let rho2 = (rho1 + kap3 * cdt * f * f / (nu * nu) * g + r / (2.0 * nu) * f * f)
        * (2.0 * kap3 * (kap4 + 1.0) / nu * g).exp();
    let rho3 = tb * r / (4.0 * (4.0 + 3.0 * theta) * rho1) * e;
    [k4, k5, k6, rho1, rho2, rho3, cdt]
}

#[test]
fn h1_constants_match_direct_evaluation() {
    // gentle regime where the direct product stays inside f64
    let (theta, nu, dt, f, r) = (0.5, 1.0, 0.02, 0.01, 10.0);
    let (_, c) = setup(theta, nu, dt);
    let (u0, u1, a1) = (0.02, 0.015, 3e-4);
    let l2 = l2_constants(&c, u0, u1, f, nu, 1.0).unwrap();
    let h1 = h1_constants(
        &c,
        &l2,
        &H1Inputs {
            dt,
            a1,
            r,
            c_omega: 1.0,
            horizon: 5.0,
        },
    )
    .unwrap();
    let d = direct(theta, nu, 1.0, &c, f, u0, u1, a1, r);
    let got = [h1.k4, h1.k5, h1.k6, h1.rho1, h1.rho2, h1.rho3, h1.c_dt];
    for (name, (g, e)) in ["K4", "K5", "K6", "rho1", "rho2", "rho3", "C_dt"].iter().zip(got.iter().zip(d)) {
        assert!(g.is_finite() && *g > 0.0, "{name} = {g}");
        assert!(close(*g, e, 1e-10), "{name}: {g} vs {e}");
    }
    assert!(h1.rho2 >= h1.rho1);
    let lim = uniform_timestep_limit(h1.c_dt, h1.k6, h1.rho3).unwrap();
    assert!(close(lim, d[6].min(d[2]).min(d[5]), 1e-10));
}

#[test]
fn viscous_example_constants_are_finite_in_log_space() {
    // r must exceed 5 C_dt = 22.43 at nu = 0.1
    let (_, c) = setup(0.5, 0.1, 0.01);
    let l2 = l2_constants(&c, 1.0, 1.0, 1.0, 0.1, 1.0).unwrap();
    let h1 = h1_constants(
        &c,
        &l2,
        &H1Inputs {
            dt: 0.01,
            a1: 1.0,
            r: 25.0,
            c_omega: 1.0,
            horizon: 1.0,
        },
    )
    .unwrap();
    for v in [h1.kappas.kappa1, h1.kappas.kappa3, h1.k4, l2.k1, l2.k2, l2.rho0] {
        assert!(v.is_finite() && v > 0.0);
    }
    for v in [h1.ln_k5, h1.ln_k6, h1.ln_rho1, h1.ln_rho3] {
        assert!(v.is_finite());
    }
    assert!(l2.t_star >= 0.0 && l2.t_star.is_finite());
    assert!(h1.kappas.kappa2 >= 3.0 && h1.kappas.kappa4 >= 3.0);
    assert!(h1.rho2 >= h1.rho1);
}

#[test]
fn rho_constants_ignore_initial_data() {
    let (_, c) = setup(0.4, 1.0, 0.05);
    let inp = H1Inputs {
        dt: 0.05,
        a1: 0.01,
        r: 8.0,
        c_omega: 1.0,
        horizon: 2.0,
    };
    let base_l2 = l2_constants(&c, 0.1, 0.2, 0.02, 1.0, 1.0).unwrap();
    let base = h1_constants(&c, &base_l2, &inp).unwrap();
    for (u0, u1, a1) in [(0.5, 0.3, 0.01), (0.1, 0.2, 7.0), (3.0, 0.0, 0.5)] {
        let l2 = l2_constants(&c, u0, u1, 0.02, 1.0, 1.0).unwrap();
        let h1 = h1_constants(&c, &l2, &H1Inputs { a1, ..inp }).unwrap();
        assert_eq!(h1.rho1.to_bits(), base.rho1.to_bits());
        assert_eq!(h1.rho2.to_bits(), base.rho2.to_bits());
        assert_eq!(h1.rho3.to_bits(), base.rho3.to_bits());
        assert_eq!(h1.kappas.kappa3.to_bits(), base.kappas.kappa3.to_bits());
    }
    // K4 depends on the data only through T*
    let mut l2 = base_l2;
    l2.norm_u0 = 9.0;
    l2.norm_u1 = 4.0;
    let h1 = h1_constants(&c, &l2, &inp).unwrap();
    assert_eq!(h1.k4.to_bits(), base.k4.to_bits());
}

#[test]
fn unforced_collapse() {
    let (_, c) = setup(0.5, 1.0, 0.1);
    let l2 = l2_constants(&c, 1.0, 1.0, 0.0, 1.0, 1.0).unwrap();
    let h1 = h1_constants(
        &c,
        &l2,
        &H1Inputs {
            dt: 0.1,
            a1: 1.0,
            r: 5.0,
            c_omega: 1.0,
            horizon: 1.0,
        },
    )
    .unwrap();
    assert_eq!(h1.kappas.kappa3, 0.0);
    assert_eq!(h1.rho1, 1.0);
    assert_eq!(h1.rho2, h1.rho1);
    assert!(h1.k4.is_infinite());
}

#[test]
fn k3_is_monotone_in_each_argument() {
    let base = [0.3, 0.7, 0.5, 2.0, 1.1, 3.4];
    let eval = |a: [f64; 6]| k3(a[0], a[1], a[2], a[3], a[4], a[5], 0.8, 0.3);
    let v0 = eval(base);
    for i in 0..6 {
        for bump in [1e-6, 1e-2, 1.0] {
            let mut a = base;
            a[i] += bump;
            assert!(eval(a) >= v0, "argument {i}");
        }
    }
}

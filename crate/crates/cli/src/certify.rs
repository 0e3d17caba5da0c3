//! `coeffs`, `certify` and `sweep`.

use std::io::Write;

use dln_core::certificate::{c_eps_theta_bound, c_h_theta_bound, max_scaled_step};
use dln_core::{
    bound_flags, build_certificate, h11_floor, h22_floor, max_timestep, system_residuals, CertificateInput,
    DlnCoefficients, ThetaParam,
};
use dln_stepper::fmt_f64;

use crate::config::{output_dir, parse_grid, ConfigMap};
use crate::error::{Result, Status};
use crate::setup;

fn theta_list(cfg: &ConfigMap, default_grid: Option<&str>) -> Result<Vec<f64>> {
    if let Some(g) = cfg.get("theta_grid") {
        return parse_grid("theta_grid", g);
    }
    if let Some(l) = cfg.f64_list("thetas")? {
        return Ok(l);
    }
    match (cfg.get("theta"), default_grid) {
        (None, Some(g)) => parse_grid("theta_grid", g),
        _ => Ok(vec![cfg.f64_or("theta", 0.5)?]),
    }
}

fn write_csv(path: &std::path::Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    if let Some(d) = path.parent() {
        std::fs::create_dir_all(d)?;
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{}", header.join(","))?;
    for r in rows {
        writeln!(f, "{}", r.join(","))?;
    }
    f.flush()?;
    Ok(())
}

pub fn cmd_coeffs(cfg: &ConfigMap, out: &mut dyn Write) -> Result<Status> {
    let thetas = theta_list(cfg, None)?;
    let nu = setup::positive(cfg, "nu", 1.0)?;
    let lambda1 = setup::positive(cfg, "lambda1", 1.0)?;
    let header: Vec<String> = [
        "theta", "alpha0", "alpha1", "alpha2", "beta0", "beta1", "beta2", "a0", "a1", "a2", "g_w1", "g_w2",
        "two_beta2_minus_one", "h11_floor", "h22_floor", "max_scaled_step", "C_dt", "C_eps_theta", "C_h_theta",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut rows = Vec::new();
    for t in thetas {
        let th = ThetaParam::new(t)?;
        let c = DlnCoefficients::new(th);
        let (w1, w2) = c.g_weights();
        let mut r = vec![t];
        r.extend(c.alpha);
        r.extend(c.beta);
        r.extend(c.dissip);
        r.extend([
            w1,
            w2,
            c.two_beta2_minus_one(),
            h11_floor(th),
            h22_floor(th),
            max_scaled_step(th),
            max_timestep(th, nu, lambda1)?,
            c_eps_theta_bound(th),
            c_h_theta_bound(th),
        ]);
        rows.push(r.into_iter().map(fmt_f64).collect::<Vec<_>>());
    }
    writeln!(out, "{}", header.join(","))?;
    for r in &rows {
        writeln!(out, "{}", r.join(","))?;
    }
    write_csv(&output_dir(cfg).join("coeffs.csv"), &header, &rows)?;
    Ok(Status::Pass)
}

/// One certificate evaluation as `(key, value)` columns plus pass flag.
fn certificate_row(theta: f64, nu: f64, lambda1: f64, dt: f64) -> Result<(Vec<(String, String)>, bool)> {
    let th = ThetaParam::new(theta)?;
    let input = CertificateInput::new(th, nu, lambda1, dt)?;
    let cert = build_certificate(&input)?;
    let res = system_residuals(&cert, &input);
    let flags = bound_flags(&cert, &input);
    let mut kv: Vec<(String, String)> = vec![
        ("nu".into(), fmt_f64(nu)),
        ("lambda1".into(), fmt_f64(lambda1)),
        ("dt".into(), fmt_f64(dt)),
        ("C_dt".into(), fmt_f64(input.max_dt())),
    ];
    kv.extend(cert.to_key_values().into_iter().map(|(k, v)| (k.to_string(), fmt_f64(v))));
    for (i, r) in res.rows.iter().enumerate() {
        kv.push((format!("residual_{}", i + 1), fmt_f64(*r)));
    }
    kv.push(("residual_scale".into(), fmt_f64(res.scale)));
    kv.push(("residual_max_rel".into(), fmt_f64(res.max_relative())));
    for (name, ok) in flags.entries() {
        kv.push((name.to_string(), if ok { "pass" } else { "fail" }.into()));
    }
    let pass = flags.all_pass();
    kv.push(("all_pass".into(), pass.to_string()));
    Ok((kv, pass))
}

pub fn cmd_certify(cfg: &ConfigMap, out: &mut dyn Write) -> Result<Status> {
    let th = setup::theta(cfg)?;
    let nu = setup::positive(cfg, "nu", 1.0)?;
    let lambda1 = setup::positive(cfg, "lambda1", 1.0)?;
    let dt = setup::timestep(cfg, th, nu, lambda1)?;
    let (kv, pass) = certificate_row(th.get(), nu, lambda1, dt)?;
    for (k, v) in &kv {
        writeln!(out, "{k}={v}")?;
    }
    let header: Vec<String> = kv.iter().map(|(k, _)| k.clone()).collect();
    let row: Vec<String> = kv.into_iter().map(|(_, v)| v).collect();
    write_csv(&output_dir(cfg).join("certificate.csv"), &header, &[row])?;
    Ok(if pass { Status::Pass } else { Status::Violation })
}

pub fn cmd_sweep(cfg: &ConfigMap, out: &mut dyn Write) -> Result<Status> {
    let thetas = theta_list(cfg, Some("0.05:0.95:0.05"))?;
    let fracs = cfg.f64_list("dt_frac")?.unwrap_or_else(|| vec![0.99]);
    let nu = setup::positive(cfg, "nu", 1.0)?;
    let lambda1 = setup::positive(cfg, "lambda1", 1.0)?;
    for &f in &fracs {
        if !(f > 0.0 && f < 1.0) {
            return Err(crate::error::CliError::Config(format!("dt_frac {f} must lie in (0, 1)")));
        }
    }
    let jobs: Vec<(f64, f64)> = thetas
        .iter()
        .flat_map(|&t| fracs.iter().map(move |&f| (t, f)))
        .collect();
    for &(t, _) in &jobs {
        ThetaParam::new(t)?;
    }

    let eval = |&(t, f): &(f64, f64)| -> (Vec<(String, String)>, bool) {
        let th = ThetaParam::new(t).expect("validated");
        let dt = f * max_timestep(th, nu, lambda1).expect("validated");
        let mut head = vec![("theta".to_string(), fmt_f64(t)), ("dt_frac".to_string(), fmt_f64(f))];
        match certificate_row(t, nu, lambda1, dt) {
            Ok((kv, pass)) => {
                head.extend(kv);
                head.push(("error".into(), String::new()));
                (head, pass)
            }
            Err(e) => {
                head.push(("error".into(), e.to_string().replace(',', ";")));
                (head, false)
            }
        }
    };
    // independent evaluations fan out over worker threads; output order is fixed by job index
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len().max(1));
    let chunk = jobs.len().div_ceil(workers).max(1);
    let results: Vec<(Vec<(String, String)>, bool)> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .chunks(chunk)
            .map(|c| s.spawn(move || c.iter().map(eval).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });

    // header from the first successful row
    let header: Vec<String> = results
        .iter()
        .find(|(kv, _)| kv.len() > 3)
        .map(|(kv, _)| kv.iter().map(|(k, _)| k.clone()).collect())
        .unwrap_or_else(|| vec!["theta".into(), "dt_frac".into(), "error".into()]);
    let mut rows = Vec::new();
    let mut failed = 0;
    for (kv, pass) in &results {
        if !pass {
            failed += 1;
        }
        let row: Vec<String> = header
            .iter()
            .map(|h| kv.iter().find(|(k, _)| k == h).map_or(String::new(), |(_, v)| v.clone()))
            .collect();
        rows.push(row);
    }
    let path = output_dir(cfg).join("sweep.csv");
    write_csv(&path, &header, &rows)?;
    writeln!(
        out,
        "sweep: {} rows, {} failing, written to {}",
        rows.len(),
        failed,
        path.display()
    )?;
    Ok(Status::from_violations(failed))
}

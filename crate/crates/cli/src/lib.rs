//! Command-line front end: `dln <command> [--config FILE] [--set k=v]... [--key value]...`.
//!
//! Every configuration key is also a kebab-case option; precedence is
//! preset < config file < `--set` < explicit options.

pub mod certify;
pub mod config;
pub mod error;
pub mod gronwall_check;
pub mod setup;
pub mod simulate;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Arg, ArgAction, ArgMatches, Command};

pub use config::{ConfigMap, KNOWN_KEYS, OUTPUT_ROOT_ENV};
pub use error::{CliError, Result, Status};

const COMMANDS: &[(&str, &str)] = &[
    ("coeffs", "Tabulate method coefficients and step-size constants"),
    ("certify", "Build and verify the H-norm certificate for one parameter set"),
    ("sweep", "Certificate sweep over a theta grid and dt fractions"),
    ("simulate", "Run the 2D periodic solver and record the bound ledger"),
    ("convergence", "Temporal convergence study against the Taylor-Green solution"),
    ("gronwall-check", "Randomized brute-force check of the discrete Gronwall lemmas"),
];

fn key_flag(key: &str) -> String {
    key.replace('_', "-")
}

fn subcommand(name: &'static str, about: &'static str) -> Command {
    let mut cmd = Command::new(name)
        .about(about)
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .value_parser(clap::value_parser!(PathBuf))
                .help("key=value config file (a run manifest works too)"),
        )
        .arg(
            Arg::new("set")
                .long("set")
                .value_name("KEY=VALUE")
                .action(ArgAction::Append)
                .help("Override one config key"),
        );
    for &key in KNOWN_KEYS.iter().filter(|k| **k != "command") {
        let arg = Arg::new(key).long(key_flag(key));
        cmd = cmd.arg(if key == "diagnostic" {
            arg.action(ArgAction::SetTrue)
                .help("Allow dt beyond the admissible bound; margins are recorded, not enforced")
        } else {
            arg.value_name("VALUE")
        });
    }
    cmd
}

pub fn command() -> Command {
    let mut cli = Command::new("dln")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Certificates, bounds and a spectral solver for the DLN time-stepping family")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for &(name, about) in COMMANDS {
        cli = cli.subcommand(subcommand(name, about));
    }
    cli
}

fn flags_from(m: &ArgMatches) -> Result<(Option<PathBuf>, ConfigMap)> {
    let file = m.get_one::<PathBuf>("config").cloned();
    let mut flags = ConfigMap::default();
    for pair in m.get_many::<String>("set").into_iter().flatten() {
        flags.set_pair(pair)?;
    }
    for &key in KNOWN_KEYS.iter().filter(|k| **k != "command") {
        if key == "diagnostic" {
            if m.get_flag(key) {
                flags.set(key, "true")?;
            }
        } else if let Some(v) = m.get_one::<String>(key) {
            flags.set(key, v)?;
        }
    }
    Ok((file, flags))
}

/// Dispatches an already-resolved configuration.
pub fn dispatch(name: &str, cfg: &ConfigMap, out: &mut dyn Write) -> Result<Status> {
    match name {
        "coeffs" => certify::cmd_coeffs(cfg, out),
        "certify" => certify::cmd_certify(cfg, out),
        "sweep" => certify::cmd_sweep(cfg, out),
        "simulate" => simulate::cmd_simulate(cfg, out),
        "convergence" => simulate::cmd_convergence(cfg, out),
        "gronwall-check" => gronwall_check::cmd_gronwall_check(cfg, out),
        other => Err(CliError::Config(format!("unknown command `{other}`"))),
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Status::ConfigError.code() } else { 0 };
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let result = flags_from(sub)
        .and_then(|(file, flags)| config::resolve(file.as_deref(), &flags))
        .and_then(|cfg| {
            if let Some(c) = cfg.get("command") {
                if c != name {
                    eprintln!("note: config was written by `{c}`, running `{name}`");
                }
            }
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let status = dispatch(name, &cfg, &mut lock);
            lock.flush()?;
            status
        });
    match result {
        Ok(s) => s.code(),
        Err(e) => {
            eprintln!("dln {name}: {e}");
            e.status().code()
        }
    }
}

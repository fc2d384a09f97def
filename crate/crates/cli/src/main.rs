//! Command-line front end: parses an experiment name, an optional config
//! file, and flag overrides; runs the experiment; prints the verdicts.
//!
//! Exit codes: 0 all checks pass, 1 check failure, 2 usage or config
//! error, 3 numeric failure.

mod config;
mod run;

use std::process::ExitCode;

use config::{apply_file, apply_flag, validate, ExperimentConfig, ExperimentKind, FLAGS};
use quasilog_core::Error;
use run::Status;

const USAGE: &str =
    "usage: quasilog <verify-f|eig|solve|branch|lambda-sweep|kappa-sweep|large|stability> \
     [--config <path>] [--out <dir>] [overrides]";

fn print_help() {
    println!("{USAGE}");
    println!();
    println!("Runs one numerical experiment on the quasilinear logistic problem and");
    println!("writes CSV artifacts plus a machine-readable verdict.txt (one line per");
    println!("checked property: `check_id status measured threshold`) into --out.");
    println!();
    println!("Config files use `key = value` lines under [domain], [weight],");
    println!("[transform], [solver], [sweep], [output] headers; unknown keys are");
    println!("rejected. Flags override file values.");
    println!();
    println!("flags:");
    println!("  --config <path>         experiment config file");
    for (flag, target, help) in FLAGS {
        println!("  {flag:<23} {help}  [{target}]");
    }
    println!();
    println!("defaults: 1D unit interval, n = 99, constant weight b0 = 1, kappa = 1,");
    println!("p = 3, seed = 0, out dir `out`. lambda = 0 selects an automatic value:");
    println!("2*lambda1 for solve, (lambda1+lambda_b0)/2 for kappa-sweep on refuge");
    println!("weights, 4.0 for large. lambda_from/lambda_to = 0 select the branch");
    println!("range lambda1*[1.001, 3]. An empty lambda grid for lambda-sweep selects");
    println!("lambda1*{{2, 5, 10, 20, 50}}.");
    println!();
    println!("env: QUASILOG_THREADS caps the worker count for parallel scans.");
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    eprintln!("{USAGE}");
    ExitCode::from(2)
}

fn worker_count() -> Result<usize, String> {
    match std::env::var("QUASILOG_THREADS") {
        Ok(v) => match v.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(format!(
                "QUASILOG_THREADS must be a positive integer, got `{v}`"
            )),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get()).min(8)),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--help" || a == "-h") {
        print_help();
        return ExitCode::SUCCESS;
    }
    let Some(kind_arg) = args.first() else {
        return usage_error("missing experiment name");
    };
    let Some(kind) = ExperimentKind::from_str(kind_arg) else {
        return usage_error(&format!("unknown experiment `{kind_arg}`"));
    };

    let workers = match worker_count() {
        Ok(n) => n,
        Err(msg) => return usage_error(&msg),
    };

    // Collect --flag value pairs; --config is applied first so that the
    // remaining flags override file values.
    let mut config_path: Option<String> = None;
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut it = args[1..].iter();
    while let Some(flag) = it.next() {
        let Some(value) = it.next() else {
            return usage_error(&format!("flag `{flag}` is missing its value"));
        };
        if flag == "--config" {
            config_path = Some(value.clone());
        } else {
            overrides.push((flag.clone(), value.clone()));
        }
    }

    let mut cfg = ExperimentConfig::new(kind);
    if let Some(path) = &config_path {
        if let Err(e) = apply_file(&mut cfg, path) {
            return usage_error(&e.0);
        }
    }
    for (flag, value) in &overrides {
        if let Err(e) = apply_flag(&mut cfg, flag, value) {
            return usage_error(&e.0);
        }
    }
    if let Err(e) = validate(&cfg) {
        return usage_error(&e.0);
    }

    match run::run(&cfg, workers) {
        Ok(verdicts) => {
            let mut failed = false;
            for v in &verdicts {
                let status = match v.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Skipped => "SKIPPED",
                };
                println!("{} {} {:.6e} {:.6e}", v.id, status, v.measured, v.threshold);
                failed |= v.status == Status::Fail;
            }
            if failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e @ (Error::Config(_) | Error::Domain(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

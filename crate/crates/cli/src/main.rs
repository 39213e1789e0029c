use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use lamsep_cli::{out_dir, parse_config, run, Command, Overrides, EXIT_ERROR};

/// Verifications, sweeps and simulations for parallel laminar flow near a curved wall.
#[derive(Debug, Parser)]
#[command(name = "lamsep", version, allow_negative_numbers = true)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON config file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for report.json and data.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    alpha1: Option<f64>,
    #[arg(long)]
    alpha2: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
}

fn main() -> ExitCode {
    // Usage errors exit 1; 2 is reserved for the adjudication outcome.
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR as u8 } else { 0 });
        }
    };
    match execute(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}

fn execute(args: Args) -> anyhow::Result<i32> {
    let overrides = Overrides {
        command: Some(args.command),
        alpha1: args.alpha1,
        alpha2: args.alpha2,
        nu: args.nu,
        delta: args.delta,
        out: args.out,
    };
    let cfg = parse_config(args.config.as_deref(), &overrides).context("loading config")?;
    let report = run(&cfg).with_context(|| format!("running {}", args.command))?;
    let code = report.exit_code();
    println!("{}: {}", report.command, report.summary());
    if code == 2 {
        println!("printed closed form and exact oracle disagree (see errata in report.json)");
    }
    println!("wrote {}", out_dir(&cfg).display());
    Ok(code)
}

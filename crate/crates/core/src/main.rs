use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fejerquant::cli::{execute, out_dir, report, RunConfig, Task};
use fejerquant::{Error, Result};

/// Moudafi's iteration with quantitative certificates.
#[derive(Parser, Debug)]
#[command(name = "fejerquant", version)]
struct Args {
    /// run | certify-metastability | cauchy-modulus | check-lemmas | moduli-eval
    task: String,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $FEJERQUANT_OUT or ./fejerquant-out)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Cap on exact values as a number of decimal digits
    #[arg(long)]
    cap: Option<f64>,
    /// Print the resolved configuration and exit
    #[arg(long)]
    dump_config: bool,
    /// Also write the trace as CSV
    #[arg(long)]
    csv: bool,
}

fn go(args: Args) -> Result<i32> {
    let task = Task::parse(&args.task)?;
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(h) = args.horizon {
        cfg.horizon = Some(h);
    }
    if let Some(c) = args.cap {
        if !(c.is_finite() && c >= 1.0) {
            return Err(Error::Config(format!("--cap must be at least 1, got {c}")));
        }
        cfg.cap_digits = Some(c.ceil() as u32);
    }
    if args.dump_config {
        println!("{}", serde_json::to_string_pretty(&cfg.resolved(task)?)?);
        return Ok(0);
    }
    let dir = out_dir(args.out.as_deref().or(cfg.out.as_deref()));
    let outcome = execute(task, &cfg, &dir, args.csv)?;
    report(&outcome, &mut std::io::stdout().lock())?;
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    match go(Args::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

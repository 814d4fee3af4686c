use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kdv_cli::{dispatch, load_config, CliError};

/// Runs one experiment suite of the damped, forced KdV laboratory.
#[derive(Debug, Parser)]
#[command(name = "kdv-lab", version)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output root; overrides `out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Ensemble seed; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

fn run(args: &Args) -> Result<bool, CliError> {
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args.out.clone().unwrap_or_else(|| cfg.out_dir.clone());
    let outcome = dispatch(&cfg, &out)?;
    let passed = outcome.passed();
    if !passed {
        let failed: Vec<&String> = outcome.summary.verdicts.iter().filter(|(_, &v)| !v).map(|(k, _)| k).collect();
        let body = serde_json::json!({
            "status": "failed",
            "suite": outcome.summary.suite,
            "failed": failed,
            "dir": outcome.dir,
        });
        println!("{body}");
    } else if !args.quiet {
        println!("{}: all {} verdicts passed, wrote {}", outcome.summary.suite, outcome.summary.verdicts.len(), outcome.dir.display());
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(2)
        }
    }
}

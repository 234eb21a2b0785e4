use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nls_ist::{load_config, run, CliError, Command, RunOptions};

/// Inverse scattering pipeline for the defocusing NLS equation with a
/// self-consistent source on a plane-wave background.
#[derive(Debug, Parser)]
#[command(name = "nls-ist", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; falls back to NLS_IST_THREADS, then all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Multiply the potential grid intervals (example potentials only).
    #[arg(long, default_value_t = 1)]
    seed_grid_refine: usize,
}

fn threads(arg: Option<usize>) -> Result<Option<usize>, CliError> {
    if arg.is_some() {
        return Ok(arg);
    }
    match std::env::var("NLS_IST_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            CliError::Config(nls_ist::ConfigError::Validation {
                field: "NLS_IST_THREADS".into(),
                message: format!("not a thread count: {v:?}"),
            })
        }),
        Err(_) => Ok(None),
    }
}

fn main_inner(args: Args) -> Result<(), CliError> {
    if let Some(n) = threads(args.threads)? {
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    if args.seed_grid_refine == 0 {
        return Err(CliError::Config(nls_ist::ConfigError::Validation {
            field: "seed-grid-refine".into(),
            message: "must be at least 1".into(),
        }));
    }
    let cfg = load_config(&args.config)?;
    let opts = RunOptions { out: args.out, refine: args.seed_grid_refine };
    let summary = run(args.command, &cfg, &opts)?;
    for r in &summary.reports {
        let status = match r.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "INFO",
        };
        println!("{status} {} max={:.3e}", r.name, r.max_residual);
    }
    println!("wrote {} files", summary.files.len());
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match main_inner(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

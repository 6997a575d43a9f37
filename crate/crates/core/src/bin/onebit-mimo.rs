use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use onebit_mimo::experiment::{manifest_path, resolve_output_path, run_experiment, ExperimentSpec};

/// Run a one-bit massive MIMO sweep described by a spec file.
#[derive(Debug, Parser)]
#[command(name = "onebit-mimo", version)]
struct Args {
    /// Experiment spec file (`key = value` lines).
    #[arg(long)]
    spec: PathBuf,
    /// Master seed; overrides the spec.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials per point; overrides the spec.
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV path; the manifest is written next to it as `.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress the summary on stderr.
    #[arg(long)]
    quiet: bool,
}

fn run(args: &Args) -> onebit_mimo::Result<()> {
    let mut spec = ExperimentSpec::from_file(&args.spec)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(trials) = args.trials {
        spec.trials = trials;
    }
    spec.validate()?;
    let out = resolve_output_path(&spec, args.out.as_deref());
    let manifest = run_experiment(&spec, &out)?;
    if !args.quiet {
        eprintln!(
            "{}: {} rows in {:.2}s -> {} (manifest {})",
            manifest.kind,
            manifest.rows,
            manifest.wall_time_s,
            out.display(),
            manifest_path(&out).display()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

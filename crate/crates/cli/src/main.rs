use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use ottosim::{parse_manifest, run, CliError, Experiment};

/// Quantum Otto engine simulations driven by JSON manifests.
#[derive(Parser)]
#[command(name = "ottosim", version)]
struct Args {
    /// Experiment to run; must match the manifest.
    experiment: Experiment,
    /// Path to the JSON run manifest.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the manifest's `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for independent cells (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = parse_manifest(&args.config).and_then(|manifest| {
        if manifest.experiment() != args.experiment {
            return Err(CliError::Config(format!(
                "manifest describes a `{}` run, not `{}`",
                manifest.experiment(),
                args.experiment
            )));
        }
        run(&manifest, args.out.as_deref(), args.threads)
    });
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ottosim: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

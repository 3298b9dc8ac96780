use std::path::PathBuf;
use std::process::ExitCode;

use benchcli::config::{ExperimentConfig, ExperimentKind};
use benchcli::experiments::{run_experiment, run_report};
use benchcli::output::write_all;
use benchcli::BenchError;
use clap::Parser;

/// Magnetic-well experiments: trajectory, compare-flows, birkhoff,
/// spectrum, counting and report.
#[derive(Debug, Parser)]
#[command(name = "magwell", version)]
struct Cli {
    /// Experiment to run.
    experiment: String,
    /// Configuration file (`key = value` lines; may be empty).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random test points, overriding `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

/// Exit code 0 when everything passes, 1 on an acceptance failure.
fn run(cli: Cli) -> Result<bool, BenchError> {
    let kind: ExperimentKind = cli.experiment.parse().map_err(BenchError::Config)?;
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if let Some(configured) = cfg.experiment {
        if configured != kind {
            return Err(BenchError::Config(format!(
                "config names experiment '{configured}' but '{kind}' was requested"
            )));
        }
    }
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let output = match kind {
        ExperimentKind::Report => run_report(&cfg, |o| println!("{}", o.summary_line()))?,
        other => {
            let output = run_experiment(other, &cfg)?;
            print!("{}", output.summary);
            output
        }
    };
    for path in write_all(&cfg.output_dir, &output.artifacts)? {
        println!("wrote {}", path.display());
    }
    Ok(output.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("acceptance failure");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("magwell: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

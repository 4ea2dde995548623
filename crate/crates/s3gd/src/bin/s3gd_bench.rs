use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use s3gd::{gen_data, run_experiment, summarize, Error, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "s3gd-bench",
    version,
    about = "Benchmark harness for semi-stochastic proximal gradient methods"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config; writes traces, manifest and summary.csv.
    Run {
        /// Experiment config file (sectioned key=value format).
        config: PathBuf,
        /// Output directory, defaults to runs/<experiment name>.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute and print the summary table of a results directory.
    Summarize {
        /// Directory previously written by `run`.
        dir: PathBuf,
    },
    /// Write a synthetic dataset in LIBSVM format.
    #[command(name = "gen-data")]
    GenData {
        /// Generator spec, e.g. n=2000,d=20,clusters=10,separation=4.0,seed=1
        spec: String,
        /// Output file.
        out: PathBuf,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } | Error::Config(_) | Error::InvalidArgument(_) => 2,
        _ => 1,
    }
}

fn run_command(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::from_path(&config).map_err(|e| match e {
                Error::Io(io) => {
                    Error::Config(format!("cannot read config {}: {io}", config.display()))
                }
                other => other,
            })?;
            let out = out.unwrap_or_else(|| PathBuf::from("runs").join(&cfg.name));
            let summary = run_experiment(&cfg, &out)?;
            print!("{summary}");
            eprintln!("results written to {}", out.display());
            Ok(())
        }
        Command::Summarize { dir } => {
            if !dir.join("runs.csv").is_file() {
                return Err(Error::Config(format!(
                    "{} is not a results directory (no runs.csv)",
                    dir.display()
                )));
            }
            print!("{}", summarize(&dir)?);
            Ok(())
        }
        Command::GenData { spec, out } => {
            let (n, d) = gen_data(&spec, &out)?;
            println!("wrote {n} samples with {d} features to {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_command(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

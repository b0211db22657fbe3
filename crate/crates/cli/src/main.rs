use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use gcae_cli::{commands, CliError, CliResult};

/// Multi-view binary clustering with graph-collaborated auto-encoder hashing.
#[derive(Parser)]
#[command(name = "gcae", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit GCAE and write codes, labels, model and report.
    Fit {
        #[arg(long)]
        config: PathBuf,
    },
    /// Score predicted labels against ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Directory for eval_report.json; defaults to the directory of --pred.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate a synthetic multi-view dataset.
    Synth {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare GCAE with the random-projection baseline.
    Benchmark {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit { config } => {
            let report = commands::fit(&config)?;
            if let Some(m) = &report.metrics {
                print!("{}", m.key_values());
            }
            println!("seconds={}", report.seconds);
        }
        Command::Eval { pred, truth, output } => {
            print!("{}", commands::eval(&pred, &truth, output.as_deref())?.metrics.key_values());
        }
        Command::Synth { config } => {
            println!("manifest={}", commands::synth(&config)?.display());
        }
        Command::Benchmark { config } => {
            print!("{}", commands::benchmark(&config)?.table());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let first = e.to_string().lines().next().unwrap_or_default().to_string();
            let err = CliError::Validation(first.trim_start_matches("error: ").to_string());
            eprintln!("{}", err.line());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.line());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

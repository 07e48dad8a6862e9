use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use grcl_cli::config::ExperimentConfig;
use grcl_cli::sweep::{run_sweep_k, run_sweep_n, write_csv};
use grcl_cli::verify::run_verify;
use grcl_cli::{init_thread_pool, CliError};

/// Two-task continual-learning regression experiments.
#[derive(Parser)]
#[command(name = "grcl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expected excess risk against the sample size.
    SweepN {
        #[arg(long)]
        config: PathBuf,
    },
    /// Expected excess risk of GRCL against the memory size.
    SweepK {
        #[arg(long)]
        config: PathBuf,
    },
    /// Runs verification suites and reports every check.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        suite: Option<String>,
    },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    init_thread_pool()?;
    match cli.command {
        Command::SweepN { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            write_csv(&cfg, &run_sweep_n(&cfg)?)?;
            Ok(true)
        }
        Command::SweepK { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            write_csv(&cfg, &run_sweep_k(&cfg)?)?;
            Ok(true)
        }
        Command::Verify { config, suite } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let reports = run_verify(&cfg, suite.as_deref())?;
            for r in &reports {
                print!("{}", r.render());
            }
            Ok(reports.iter().all(|r| r.passed()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

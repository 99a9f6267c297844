use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pfunc_cli::{config, registry, run, CliError};

/// Numerical laboratory for P-function candidates on elliptic problems.
#[derive(Parser)]
#[command(name = "pfunc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a job file, run every job, and write one report per job.
    ///
    /// Exits 0 when every check of every job passes, 1 when any fails,
    /// 2 on configuration or I/O errors.
    Run { config: PathBuf },
    /// Print the registered equations, candidates, fixtures, and checks.
    List,
    /// Re-run one job's check and write its plane field as CSV.
    DumpField {
        /// Job id from the config file.
        job: String,
        /// Check id on that job; must be one that produces a field.
        check: String,
        /// Job file that defines the job.
        #[arg(long)]
        config: PathBuf,
        /// Directory the CSV files are written into.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run { config } => {
            let jobs = config::load(&config)?;
            let all_passed = run::run_all(&jobs)?;
            Ok(if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::List => {
            print!("{}", registry::listing());
            Ok(ExitCode::SUCCESS)
        }
        Command::DumpField {
            job,
            check,
            config,
            out,
        } => {
            let jobs = config::load(&config)?;
            run::dump_one(&jobs, &job, &check, &out)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

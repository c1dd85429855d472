//! `pfollow`: run follower scenarios, dump the velocity curves, sweep a
//! scenario parameter.
//!
//! Exit codes: 0 ok, 1 usage, 2 invalid input, 3 runtime failure.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pfollow_core::harness::{self, HarnessError, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "pfollow", version, about = "RGB-D person-following simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a scenario and write `<name>.trace.csv` and `<name>.metrics.json`.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Sample both control laws into `angular_velocity.csv` and `linear_velocity.csv`.
    Curves {
        /// Controller TOML; keys not given take their defaults.
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Re-run a scenario once per value and print a metrics table as CSV.
    Sweep {
        scenario: PathBuf,
        /// Dotted field path, e.g. `detector.miss_rate` or `persons.*.speed_mps`.
        #[arg(long)]
        param: String,
        /// Comma-separated numbers; an empty string gives an empty table.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// Also write the table to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Harness(HarnessError),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Harness(e)
    }
}

fn parse_values(list: &str) -> Result<Vec<f64>, Failure> {
    if list.trim().is_empty() {
        return Ok(Vec::new());
    }
    list.split(',')
        .map(|s| {
            let s = s.trim();
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Failure::Usage(format!(
                    "--values: `{s}` is not a finite number"
                ))),
            }
        })
        .collect()
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run { scenario, out } => {
            let scn = ScenarioConfig::load(&scenario)?;
            let result = harness::run(&scn)?;
            let (trace, metrics) = harness::write_run(&result, &out)?;
            eprintln!("wrote {} and {}", trace.display(), metrics.display());
        }
        Command::Curves { config, out } => {
            let ctl = harness::load_controller(&config)?;
            let (angular, linear) = harness::write_curves(&ctl, &out)?;
            eprintln!("wrote {} and {}", angular.display(), linear.display());
        }
        Command::Sweep {
            scenario,
            param,
            values,
            out,
        } => {
            let values = parse_values(&values)?;
            let scn = ScenarioConfig::load(&scenario)?;
            let rows = harness::sweep(&scn, &param, &values)?;
            let mut table = Vec::new();
            harness::write_sweep_csv(&rows, &mut table).expect("in-memory write");
            if let Some(path) = out {
                std::fs::write(&path, &table)
                    .map_err(|source| HarnessError::Write { path, source })?;
            }
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(&table)
                .and_then(|_| stdout.flush())
                .map_err(|source| HarnessError::Write {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Harness(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

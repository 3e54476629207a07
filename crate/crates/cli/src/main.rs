use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coherence_cli::commands::{self, ScheduleSource};
use coherence_cli::scenario::Scenario;
use coherence_cli::CliError;

/// Recover the initial coherence of a dephasing qubit with a three-stage
/// open-loop control.
#[derive(Parser)]
#[command(name = "coherence-ctl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the breakdown time (p - c)/(γ c) of the scenario's initial state.
    Breakdown {
        #[arg(long)]
        config: PathBuf,
    },
    /// Synthesise a control schedule, print the run report and save the schedule.
    Synthesize {
        #[arg(long)]
        config: PathBuf,
        /// Schedule JSON destination (defaults to the scenario's output_path).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the controlled trajectory as CSV.
    Simulate {
        /// Scenario file; also supplies the initial state when --schedule is given.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Replay a saved schedule instead of synthesising one.
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// Sampling step (defaults to the scenario's sample_step).
        #[arg(long)]
        step: Option<f64>,
        /// CSV destination (defaults to output_path, then stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for the limit time and limit field, and the bound on the field.
    Limit {
        #[arg(long)]
        config: PathBuf,
    },
    /// Rerun the reference example and compare against its known values.
    ReproduceExample {
        /// Directory for the trajectory CSV and plot data.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Breakdown { config } => commands::breakdown(&Scenario::load(&config)?, &mut stdout),
        Command::Synthesize { config, out } => {
            commands::synthesize_cmd(&Scenario::load(&config)?, out.as_deref(), &mut stdout).map(drop)
        }
        Command::Simulate {
            config,
            schedule,
            step,
            out,
        } => {
            let config = config.ok_or_else(|| {
                CliError::Config(
                    "simulate needs --config (for --schedule it supplies the initial state)".into(),
                )
            })?;
            let scenario = Scenario::load(&config)?;
            let source = match schedule.as_deref() {
                Some(path) => ScheduleSource::File(path),
                None => ScheduleSource::Synthesize,
            };
            commands::simulate_cmd(&scenario, source, step, out.as_deref(), &mut stdout)
        }
        Command::Limit { config } => commands::limit_cmd(&Scenario::load(&config)?, &mut stdout),
        Command::ReproduceExample { out } => commands::reproduce_example(&out, &mut stdout).map(drop),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

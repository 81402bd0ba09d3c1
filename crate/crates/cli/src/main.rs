//! `hinfpi`: synthesize, verify and simulate H∞-optimal PI controllers.
//!
//! Exit codes: 0 success, 1 internal or I/O error, 2 parse or usage error,
//! 3 inadmissible instance, 4 verification failed, 5 expected violation
//! demonstrated (`verify --violate`).

mod commands;
mod document;
mod error;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{GridFlags, Outcome, StepFlags};
use document::{SystemDocument, TauChoice};
use error::CliError;

#[derive(Parser)]
#[command(name = "hinfpi", version, about = "H-infinity optimal PI control of symmetric plants and networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// System document (JSON).
    input: PathBuf,
    /// Time constant, overriding the document.
    #[arg(long, conflicts_with = "tau_factor")]
    tau: Option<f64>,
    /// Time constant as a multiple of the threshold tau*.
    #[arg(long)]
    tau_factor: Option<f64>,
}

impl Input {
    fn load(&self) -> Result<commands::Loaded, CliError> {
        let doc = SystemDocument::read(&self.input)?;
        let choice = match (self.tau, self.tau_factor) {
            (Some(t), _) => Some(TauChoice::Absolute(t)),
            (None, Some(c)) => Some(TauChoice::Factor(c)),
            (None, None) => None,
        };
        commands::load(doc, choice)
    }
}

#[derive(Args)]
struct TauList {
    /// Absolute time constants for the curves.
    #[arg(long, value_delimiter = ',')]
    taus: Vec<f64>,
    /// Time constants as multiples of tau* [default: 1,2,0.5 when no list is given].
    #[arg(long, value_delimiter = ',')]
    tau_factors: Vec<f64>,
}

#[derive(Args)]
struct Grid {
    #[arg(long, default_value_t = 1e-3)]
    grid_min: f64,
    #[arg(long, default_value_t = 1e3)]
    grid_max: f64,
    #[arg(long, default_value_t = 400)]
    grid_points: usize,
}

impl Grid {
    fn flags(&self) -> GridFlags {
        GridFlags {
            min: self.grid_min,
            max: self.grid_max,
            points: self.grid_points,
        }
    }
}

#[derive(Args)]
struct StepArgs {
    /// Simulation horizon.
    #[arg(long = "T", default_value_t = 200.0)]
    t_final: f64,
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    dt: f64,
    /// Reference entry receiving the unit step.
    #[arg(long, default_value_t = 0)]
    channel: usize,
}

impl StepArgs {
    fn flags(&self) -> StepFlags {
        StepFlags {
            t_final: self.t_final,
            dt: self.dt,
            channel: self.channel,
        }
    }
}

#[derive(Args)]
struct Check {
    /// Relative tolerance on norm checks.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Print tau*, k, gamma and the PI gains.
    Synth {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Certify the synthesized controller numerically.
    Verify {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        check: Check,
        /// Random competitor controllers to sample.
        #[arg(long, default_value_t = 0)]
        competitors: usize,
        /// Apply the formula at this fraction of tau* and show the effort
        /// peak leaving omega = 0.
        #[arg(long)]
        violate: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Write effort and rejection gain curves as CSV.
    Freqresp {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        taus: TauList,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Write closed-loop step responses as CSV.
    Step {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        taus: TauList,
        #[command(flatten)]
        step: StepArgs,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run every command on a built-in instance (buffers, scalar).
    Demo {
        name: String,
        /// Output directory [default: demo-<name>].
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        check: Check,
        #[arg(long, default_value_t = 500)]
        competitors: usize,
        #[command(flatten)]
        grid: Grid,
        #[command(flatten)]
        step: StepArgs,
    },
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Synth { input, out, json } => commands::cmd_synth(&input.load()?, out.as_deref(), json),
        Command::Verify {
            input,
            check,
            competitors,
            violate,
            out,
            json,
        } => {
            let cfg = commands::verification_config(check.tol, check.seed, competitors)?;
            commands::cmd_verify(&input.load()?, &cfg, violate, out.as_deref(), json)
        }
        Command::Freqresp { input, taus, grid, out } => {
            let l = input.load()?;
            let list = commands::tau_list(&l, &taus.taus, &taus.tau_factors)?;
            commands::cmd_freqresp(&l, &list, &grid.flags(), &out)
        }
        Command::Step { input, taus, step, out } => {
            let l = input.load()?;
            let list = commands::tau_list(&l, &taus.taus, &taus.tau_factors)?;
            commands::cmd_step(&l, &list, &step.flags(), &out)
        }
        Command::Demo {
            name,
            out,
            check,
            competitors,
            grid,
            step,
        } => commands::cmd_demo(
            &name,
            &commands::DemoFlags {
                out: out.unwrap_or_else(|| PathBuf::from(format!("demo-{name}"))),
                seed: check.seed,
                competitors,
                tol: check.tol,
                grid: grid.flags(),
                step: step.flags(),
            },
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(4),
        Ok(Outcome::ViolationDemonstrated) => ExitCode::from(5),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

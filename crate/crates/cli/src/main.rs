//! `hvacrl`: train, evaluate and compare heating-setpoint controllers.

mod commands;
mod compare;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hvacrl_core::training::PretrainingMode;

const EXIT_FAILURE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "hvacrl", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full training protocol into a new run directory.
    Train(TrainArgs),
    /// Evaluate the rule-based controller on the reference week.
    Baseline(BaselineArgs),
    /// Evaluate the final agents of a finished training run.
    Evaluate(EvaluateArgs),
    /// Summarise runs against a baseline as plot-ready CSV.
    Compare(CompareArgs),
    /// Write a generated weekly occupancy schedule as CSV.
    GenSchedule(GenScheduleArgs),
    /// Write a synthetic hourly weather series as CSV.
    GenWeather(GenWeatherArgs),
}

#[derive(Args, Clone)]
pub struct ConfigArgs {
    /// Run config (TOML or JSON), or the manifest.json of an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in preset used when no config file is given.
    #[arg(long, default_value = "desk", conflicts_with = "config")]
    pub preset: String,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output root; each run gets a new timestamped directory inside it.
    #[arg(long, env = "HVACRL_OUT_DIR", default_value = "runs")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum PretrainingArg {
    None,
    Broadcast,
    Partial,
}

impl From<PretrainingArg> for PretrainingMode {
    fn from(p: PretrainingArg) -> Self {
        match p {
            PretrainingArg::None => PretrainingMode::None,
            PretrainingArg::Broadcast => PretrainingMode::Broadcast,
            PretrainingArg::Partial => PretrainingMode::PartialRuleBased,
        }
    }
}

#[derive(Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    #[arg(long, value_enum)]
    pub pretraining: Option<PretrainingArg>,
    /// Multiply every phase length by this factor.
    #[arg(long)]
    pub episodes_scale: Option<f64>,
    /// Print progress every N episodes (0 = silent).
    #[arg(long, default_value_t = 50)]
    pub progress: usize,
}

#[derive(Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Directory of a completed training run.
    pub run: PathBuf,
    /// Evaluation window in days (defaults to the run's config).
    #[arg(long)]
    pub days: Option<usize>,
    /// Also write the per-step trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args)]
pub struct CompareArgs {
    /// Run directories; a baseline run among them is picked up automatically.
    #[arg(required = true)]
    pub runs: Vec<PathBuf>,
    /// Baseline run directory, if not among `runs`.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct GenScheduleArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct GenWeatherArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 31)]
    pub days: usize,
    #[arg(long)]
    pub output: PathBuf,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<hvacrl_core::Error>() {
            return core_exit_code(e);
        }
    }
    EXIT_FAILURE
}

fn core_exit_code(e: &hvacrl_core::Error) -> u8 {
    use hvacrl_core::Error as E;
    match e {
        E::Divergence { .. } => EXIT_DIVERGED,
        E::AtStep { source, .. } => core_exit_code(source),
        E::Config(_) | E::Input(_) | E::Parse { .. } | E::Io { .. } | E::Format(_) => EXIT_INPUT,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => commands::train(args),
        Command::Baseline(args) => commands::baseline(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Compare(args) => compare::run(args),
        Command::GenSchedule(args) => commands::gen_schedule(args),
        Command::GenWeather(args) => commands::gen_weather(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

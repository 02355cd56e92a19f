//! `legalsim` command-line interface: rule validation, training, the
//! cross-play league, evaluation tables, robustness sweeps and replays.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use legalsim::evaluation::SweepAxis;
use legalsim::harness::PolicyKind;

#[derive(Parser, Debug)]
#[command(name = "legalsim", version, about = "Two-party litigation simulator and evaluation pipeline")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    parallel: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check rule documents against the schema.
    Validate(ValidateArgs),
    /// Train PPO and/or the contextual bandit against the heuristic.
    Train {
        #[command(flatten)]
        args: TrainArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the cross-play league and write records plus summary tables.
    League {
        #[command(flatten)]
        args: LeagueArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Recompute summary tables from a records file.
    Evaluate {
        #[command(flatten)]
        args: EvaluateArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Sanction-tendency and parameter-noise robustness sweeps.
    Sweep {
        #[command(flatten)]
        args: SweepArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Print a step-by-step trace of recorded or scripted episodes.
    Replay(ReplayArgs),
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Rule documents to check.
    #[arg(required = true)]
    pub rules: Vec<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EnvArgs {
    /// Environment configuration JSON (defaults when omitted).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in regime.
    #[arg(long, default_value = "bankruptcy")]
    pub regime: String,
    /// Custom rule document; overrides --regime.
    #[arg(long)]
    pub rules: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Overwrite a non-empty output directory.
    #[arg(long)]
    pub force: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum TrainTarget {
    Ppo,
    Bandit,
    All,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 300)]
    pub episodes: usize,
    #[arg(long, value_delimiter = ',', default_value = "permissive,strict")]
    pub judges: Vec<String>,
    /// Which learner to train.
    #[arg(long, value_enum, default_value = "all")]
    pub policy: TrainTarget,
}

#[derive(Args, Debug)]
pub struct LeagueArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "ppo,bandit,llm,heuristic")]
    pub policies: Vec<PolicyKind>,
    #[arg(long, value_delimiter = ',', default_value = "permissive,strict")]
    pub judges: Vec<String>,
    /// Number of case seeds per pairing and judge.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    /// Directory written by `legalsim train`.
    #[arg(long)]
    pub checkpoints: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    pub resamples: usize,
    /// Keep updating the bandit during the league.
    #[arg(long)]
    pub bandit_learning: bool,
    /// Play PPO's most probable token instead of sampling.
    #[arg(long)]
    pub ppo_greedy: bool,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Records file written by `legalsim league`.
    #[arg(long)]
    pub records: PathBuf,
    /// Environment configuration (for the flag threshold).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub resamples: usize,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub env: EnvArgs,
    /// Axes to sweep: sanction, noise.
    #[arg(long, value_delimiter = ',', required = true, value_parser = commands::parse_axis)]
    pub axis: Vec<SweepAxis>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "ppo,bandit,llm,heuristic")]
    pub policies: Vec<PolicyKind>,
    #[arg(long, value_delimiter = ',', default_value = "permissive,strict")]
    pub judges: Vec<String>,
    /// Episodes per sweep point.
    #[arg(long, default_value_t = 60)]
    pub episodes: usize,
    #[arg(long, default_value_t = 500)]
    pub resamples: usize,
    #[arg(long)]
    pub checkpoints: Option<PathBuf>,
    #[arg(long)]
    pub ppo_greedy: bool,
}

#[derive(Args, Debug)]
pub struct ReplayArgs {
    /// Records file; the built-in discovery-loop fixture is replayed when
    /// neither this nor --fixture is given.
    pub record: Option<PathBuf>,
    /// Scripted fixture to run and render.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    /// Render only the record at this position.
    #[arg(long)]
    pub index: Option<usize>,
    /// Master seed for fixture runs.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.parallel {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: could not size the worker pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match &cli.command {
        Command::Validate(args) => {
            commands::validate(args).map(|ok| if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Train { args, out } => commands::train(args, out).map(|_| ExitCode::SUCCESS),
        Command::League { args, out } => commands::league(args, out).map(|_| ExitCode::SUCCESS),
        Command::Evaluate { args, out } => commands::evaluate(args, out).map(|_| ExitCode::SUCCESS),
        Command::Sweep { args, out } => commands::sweep(args, out).map(|_| ExitCode::SUCCESS),
        Command::Replay(args) => commands::replay(args).map(|_| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

//! `chatgames`: generate dialogue games, solve them and run the evaluation harnesses.

mod commands;
mod setup;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "chatgames", version, about = "Dialogue tasks as imperfect-information games")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Game config (JSON) to use instead of a generated one.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = BackendKind::Stub)]
    pub backend: BackendKind,
    /// Recorded responses for the scripted backend.
    #[arg(long, global = true)]
    pub script: Option<PathBuf>,
    /// Instruction-following rate of the stub generator.
    #[arg(long, global = true, default_value_t = 0.75)]
    pub follow_rate: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendKind {
    Stub,
    Http,
    Scripted,
}

impl BackendKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Stub => "stub",
            BackendKind::Http => "http",
            BackendKind::Scripted => "scripted",
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Emit generated game configs.
    Gen {
        #[arg(long, default_value = "fruit")]
        domain: String,
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
    /// Solve one game with CFR; writes policy.json and metrics.csv.
    Cfr {
        #[arg(long, default_value = "fruit")]
        domain: String,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
    },
    /// NashConv, CFR gain and ESS averaged over generated games.
    EvalTable1 {
        /// Domain, or `all`.
        #[arg(long, default_value = "all")]
        domain: String,
        #[arg(long, default_value_t = 10)]
        games: usize,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
    },
    /// Open-ended PSRO over instruction labels.
    Psro {
        #[arg(long, default_value = "fruit")]
        domain: String,
        /// Scenarios in the game family (ignored with --config).
        #[arg(long, default_value_t = 4)]
        scenarios: usize,
        #[arg(long, default_value = "shotgun")]
        operator: String,
        #[arg(long, default_value = "replicator")]
        meta_solver: String,
        #[arg(long, default_value_t = 3)]
        iterations: usize,
        #[arg(long, default_value_t = 4)]
        rollouts: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// `vocabulary`, `llm`, or a comma-separated scripted list.
        #[arg(long, default_value = "vocabulary")]
        proposer: String,
        /// Grow each player's set separately.
        #[arg(long)]
        asymmetric: bool,
    },
    /// Reward-model error against the rule oracle on templated outcomes.
    EvalReward {
        #[arg(long, default_value = "fruit")]
        domain: String,
        /// valid, rejected, incomplete, or all.
        #[arg(long, default_value = "all")]
        outcome: String,
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    /// How often generations are recognized as the instructed action.
    EvalSteering {
        #[arg(long, default_value = "debate")]
        domain: String,
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    /// Imitation learning of CFR policies.
    Imitate {
        #[command(subcommand)]
        step: ImitateStep,
    },
    /// Election between the imitation policy and the always-`any` baseline.
    MetaGame {
        #[arg(long, default_value = "fruit")]
        domain: String,
        #[arg(long)]
        model: PathBuf,
        /// Held-out split written by `imitate build-dataset`.
        #[arg(long)]
        split: Option<PathBuf>,
        /// Evaluation games when no split is given.
        #[arg(long, default_value_t = 20)]
        games: usize,
        #[arg(long, default_value_t = 8)]
        rollouts: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum ImitateStep {
    /// Solve generated games and write dataset.jsonl plus the train/held-out split.
    BuildDataset {
        #[arg(long, default_value = "fruit")]
        domain: String,
        #[arg(long, default_value_t = 200)]
        games: usize,
        #[arg(long, default_value_t = 10)]
        cfr_iterations: usize,
        #[arg(long, default_value_t = chatgames::imitation::DEFAULT_DIMENSION)]
        dim: usize,
    },
    /// Train the policy network; writes model.json and loss.csv.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value_t = 128)]
        batch: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
    },
}

/// Failure classes with distinct exit codes.
#[derive(Debug)]
pub enum Failure {
    Other(anyhow::Error),
    Backend(anyhow::Error),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Other(e) => write!(f, "error: {e:#}"),
            Failure::Backend(e) => write!(f, "backend failure: {e:#}"),
        }
    }
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Backend(_) => 2,
        }
    }
}

/// Parses and runs `argv`, returning the process exit code.
pub fn dispatch<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::run(&cli) {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("{failure}");
            failure.exit_code()
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(dispatch(std::env::args_os()))
}

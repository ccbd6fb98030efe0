//! Prompt-space response oracles: grow per-player sets of instruction strings by approximate
//! best responses to the meta-game equilibrium over the current sets.

mod operators;
mod proposer;
mod rollout;
mod runner;

pub use operators::{
    br_better, br_categorical, br_shotgun, br_trajectory, BetterResponse, CategoryResponse, Evaluator,
    RETRIES_PER_LABEL,
};
pub use proposer::{
    LlmProposer, ProposalKind, ProposalRequest, Proposer, RepeatProposer, ScriptedProposer, VocabularyProposer,
    TONE_VOCABULARY,
};
pub use rollout::{
    cell_config, chance_depth, estimate_payoff_tensor, rollout, seed_tuple, GameFamily, PayoffEstimator,
};
pub use runner::{marginals_csv, psro_loop, PsroIteration, PsroTrace, StopReason};

use serde::{Deserialize, Serialize};
use std::str::FromStr;
use thiserror::Error;

use crate::backends::BackendError;
use crate::game::{normalize_label, GameError};
use crate::nfg::{MetaSolver, MetaSolverParams, NfgError};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PsroError {
    #[error("proposer produced no novel label for player {player} in {attempts} attempts")]
    ProposerExhausted { player: usize, attempts: usize },
    #[error("invalid PSRO config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Nfg(#[from] NfgError),
}

impl From<BackendError> for PsroError {
    fn from(e: BackendError) -> Self {
        PsroError::Game(GameError::Backend(e))
    }
}

/// An instruction string with its score against the co-player's meta-strategy, if evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub label: String,
    pub score: Option<f64>,
}

impl Candidate {
    pub fn new(label: impl Into<String>) -> Self {
        Candidate { label: label.into(), score: None }
    }
}

/// Per-player candidate lists; labels are unique per player after normalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub players: Vec<Vec<Candidate>>,
}

impl CandidateSet {
    pub fn new(initial: &[&str], num_players: usize) -> Result<Self, PsroError> {
        let mut set = CandidateSet { players: vec![Vec::new(); num_players] };
        for p in 0..num_players {
            for label in initial {
                if !set.push(p, label) {
                    return Err(PsroError::InvalidConfig(format!("duplicate initial label `{label}`")));
                }
            }
        }
        Ok(set)
    }

    pub fn labels(&self, player: usize) -> Vec<String> {
        self.players[player].iter().map(|c| c.label.clone()).collect()
    }

    pub fn contains(&self, player: usize, label: &str) -> bool {
        let norm = normalize_label(label);
        self.players[player].iter().any(|c| normalize_label(&c.label) == norm)
    }

    /// Appends `label` unless already present; reports whether it was added.
    pub fn push(&mut self, player: usize, label: &str) -> bool {
        if self.contains(player, label) || normalize_label(label).is_empty() {
            return false;
        }
        self.players[player].push(Candidate::new(label.trim()));
        true
    }
}

/// The four approximate best-response operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BrOperator {
    #[default]
    Shotgun,
    Better,
    Trajectory,
    Categorical,
}

impl FromStr for BrOperator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalize_label(s).as_str() {
            "shotgun" => Ok(BrOperator::Shotgun),
            "better" => Ok(BrOperator::Better),
            "trajectory" => Ok(BrOperator::Trajectory),
            "categorical" => Ok(BrOperator::Categorical),
            other => Err(format!("unknown best-response operator `{other}`")),
        }
    }
}

pub const INITIAL_TONES: [&str; 4] = ["calm", "assertive", "submissive", "any"];

#[derive(Clone, Debug, PartialEq)]
pub struct PsroConfig {
    pub br_operator: BrOperator,
    /// Candidates per best-response call (labels per category for the categorical operator).
    pub k: usize,
    /// New categories per categorical call.
    pub k_prime: usize,
    pub max_outer_iterations: usize,
    pub rollouts_per_cell: usize,
    pub meta_solver: MetaSolver,
    pub meta_params: MetaSolverParams,
    /// Proposal budget of the better-response operator.
    pub max_attempts: usize,
    /// One best response per iteration, appended to both players' sets.
    pub symmetric: bool,
    pub initial_labels: Vec<String>,
    pub run_seed: u64,
}

impl Default for PsroConfig {
    fn default() -> Self {
        PsroConfig {
            br_operator: BrOperator::Shotgun,
            k: 3,
            k_prime: 2,
            max_outer_iterations: 3,
            rollouts_per_cell: 4,
            meta_solver: MetaSolver::Replicator,
            meta_params: MetaSolverParams::default(),
            max_attempts: 10,
            symmetric: true,
            initial_labels: INITIAL_TONES.iter().map(|s| s.to_string()).collect(),
            run_seed: 0,
        }
    }
}

impl PsroConfig {
    pub fn validate(&self) -> Result<(), PsroError> {
        if self.k == 0 || self.k_prime == 0 {
            return Err(PsroError::InvalidConfig("k and k_prime must be at least 1".into()));
        }
        if self.rollouts_per_cell == 0 {
            return Err(PsroError::InvalidConfig("rollouts_per_cell must be at least 1".into()));
        }
        if self.initial_labels.is_empty() {
            return Err(PsroError::InvalidConfig("initial label set is empty".into()));
        }
        Ok(())
    }
}

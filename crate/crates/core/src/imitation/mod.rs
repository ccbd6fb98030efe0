//! Distilling CFR policies into a feed-forward network over infostate embeddings.

mod dataset;
mod election;
mod embed;
mod mlp;
mod train;

pub use dataset::{build_dataset, build_dataset_for_seeds, read_jsonl, split_games, write_jsonl, ImitationExample};
pub use election::{
    election_from_tensor, election_tensor, meta_game_election, AgentPolicy, BaselineAgent, ElectionResult,
    ImitationAgent,
};
pub use embed::{embed_infostate, Embedder, HashingEmbedder, DEFAULT_DIMENSION};
pub use mlp::{entropy, softmax, MlpPolicy, HIDDEN, LOG_FLOOR};
pub use train::{loss_curve_csv, train, Adam, LossPoint, TrainConfig};

use crate::game::GameError;

#[derive(Debug, thiserror::Error)]
pub enum ImitationError {
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("loss became non-finite at step {step}")]
    NonFiniteLoss { step: usize, curve: Vec<LossPoint> },
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

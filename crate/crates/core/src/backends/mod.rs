//! Pluggable text capabilities: generation, classification, termination judging and reward
//! scoring. Each comes with a deterministic stub, a scripted replayer and an HTTP client.

mod http;
mod rules;
mod scripted;
mod stub;

pub use http::{
    HttpClassifier, HttpClient, HttpConfig, HttpDebateJudge, HttpGenerator, HttpRewardModel,
    HttpTerminationJudge,
};
pub use rules::{parse_utilities, GroundTruthReward, PayoffTableReward, RuleTerminationJudge};
pub use scripted::{ScriptedClassifier, ScriptedGenerator};
pub use stub::{
    extract_marker, marker, strip_marker, SilentGenerator, StubClassifier, StubGenerator,
    StubProfile,
};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

use crate::domains::debate::StubDebateJudge;
use crate::game::{normalize_label, DialogueState, DomainId, GameConfig};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BackendError {
    #[error("backend failure: {0}")]
    Failure(String),
    #[error("backend misconfigured: {0}")]
    Config(String),
}

/// Side information the stub generator needs to emulate instruction following.
/// Never sent over the wire.
#[derive(Clone, Debug, PartialEq)]
pub struct Steering {
    pub domain: DomainId,
    pub instructed: String,
    pub labels: Vec<String>,
}

#[derive(Serialize, Clone, Debug, PartialEq)]
pub struct GenerationRequest {
    pub prompt: String,
    pub seed: u32,
    pub max_tokens: u32,
    #[serde(skip)]
    pub steering: Option<Steering>,
}

impl GenerationRequest {
    pub fn new(prompt: impl Into<String>, seed: u32) -> Self {
        GenerationRequest { prompt: prompt.into(), seed, max_tokens: 256, steering: None }
    }
}

pub trait Generator: Send + Sync {
    fn generate(&self, request: &GenerationRequest) -> Result<String, BackendError>;
}

pub trait Classifier: Send + Sync {
    /// Probability of each label having produced `message`.
    fn classify(&self, message: &str, labels: &[String]) -> Result<Vec<f64>, BackendError>;
}

pub trait TerminationJudge: Send + Sync {
    fn judge_terminal(&self, config: &GameConfig, thread: &DialogueState) -> Result<bool, BackendError>;
}

pub trait RewardModel: Send + Sync {
    fn score(&self, config: &GameConfig, transcript: &DialogueState) -> Result<RewardJudgment, BackendError>;
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeTag {
    Valid,
    Rejected,
    Incomplete,
}

impl OutcomeTag {
    pub const ALL: [OutcomeTag; 3] = [OutcomeTag::Valid, OutcomeTag::Rejected, OutcomeTag::Incomplete];

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeTag::Valid => "valid",
            OutcomeTag::Rejected => "rejected",
            OutcomeTag::Incomplete => "incomplete",
        }
    }
}

impl fmt::Display for OutcomeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for OutcomeTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalize_label(s).as_str() {
            "valid" => Ok(OutcomeTag::Valid),
            "rejected" => Ok(OutcomeTag::Rejected),
            "incomplete" => Ok(OutcomeTag::Incomplete),
            other => Err(format!("unknown outcome `{other}`")),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct RewardJudgment {
    pub values: Vec<f64>,
    pub outcome_tag: OutcomeTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
}

impl RewardJudgment {
    pub fn zero(num_players: usize, outcome_tag: OutcomeTag) -> Self {
        RewardJudgment { values: vec![0.0; num_players], outcome_tag, rationale: None }
    }

    pub fn clamp_into(&mut self, min: f64, max: f64) {
        for v in &mut self.values {
            *v = if v.is_nan() { 0.0f64.clamp(min, max) } else { v.clamp(min, max) };
        }
    }
}

/// The four capabilities a dialogue game needs.
#[derive(Clone)]
pub struct BackendBundle {
    pub generator: Arc<dyn Generator>,
    pub classifier: Arc<dyn Classifier>,
    pub terminator: Arc<dyn TerminationJudge>,
    pub reward: Arc<dyn RewardModel>,
}

impl BackendBundle {
    /// Deterministic stub backends with rule-based termination and ground-truth rewards.
    pub fn stub(profile: StubProfile) -> Self {
        let classifier: Arc<dyn Classifier> = Arc::new(StubClassifier);
        BackendBundle {
            generator: Arc::new(StubGenerator::new(profile)),
            classifier: classifier.clone(),
            terminator: Arc::new(RuleTerminationJudge),
            reward: Arc::new(GroundTruthReward::new(Arc::new(StubDebateJudge::new(classifier)))),
        }
    }

    pub fn with_generator(mut self, generator: Arc<dyn Generator>) -> Self {
        self.generator = generator;
        self
    }

    pub fn with_reward(mut self, reward: Arc<dyn RewardModel>) -> Self {
        self.reward = reward;
        self
    }

    pub fn with_terminator(mut self, terminator: Arc<dyn TerminationJudge>) -> Self {
        self.terminator = terminator;
        self
    }

    pub fn with_classifier(mut self, classifier: Arc<dyn Classifier>) -> Self {
        self.classifier = classifier;
        self
    }
}

impl Default for BackendBundle {
    fn default() -> Self {
        BackendBundle::stub(StubProfile::default())
    }
}

/// Stable 64-bit hash of the concatenated parts (first eight bytes of SHA-256).
pub fn hash64(parts: &[&[u8]]) -> u64 {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part);
    }
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Maps a free-form model answer onto a one-hot vector over `labels`; uniform if no label
/// can be read off the answer.
pub fn answer_to_distribution(answer: &str, labels: &[String]) -> Vec<f64> {
    let n = labels.len();
    let mut out = vec![0.0; n];
    let cleaned = answer
        .trim()
        .trim_start_matches("Answer:")
        .trim_start_matches("answer:")
        .trim();
    let first = cleaned
        .split(|c: char| !c.is_alphanumeric() && c != '-' && c != '_')
        .find(|w| !w.is_empty())
        .map(normalize_label);
    if let Some(word) = first {
        if let Some(i) = labels.iter().position(|l| normalize_label(l) == word) {
            out[i] = 1.0;
            return out;
        }
    }
    crate::num::uniform(n)
}

/// Labels tied for the maximum probability.
pub fn argmax_set(probs: &[f64], tol: f64) -> Vec<usize> {
    let best = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    probs
        .iter()
        .enumerate()
        .filter(|(_, p)| best - **p <= tol)
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels() -> Vec<String> {
        ["logos", "ethos", "pathos"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn answer_parsing_is_one_hot_or_uniform() {
        assert_eq!(answer_to_distribution("Answer: ethos", &labels()), vec![0.0, 1.0, 0.0]);
        assert_eq!(answer_to_distribution("  Pathos.\nBecause...", &labels()), vec![0.0, 0.0, 1.0]);
        let u = answer_to_distribution("I cannot tell", &labels());
        assert!(u.iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn argmax_set_keeps_ties() {
        assert_eq!(argmax_set(&[0.25; 4], 1e-12), vec![0, 1, 2, 3]);
        assert_eq!(argmax_set(&[0.1, 0.7, 0.2], 1e-12), vec![1]);
    }

    #[test]
    fn hash64_is_stable() {
        assert_eq!(hash64(&[b"abc"]), hash64(&[b"a", b"bc"]));
        assert_ne!(hash64(&[b"abc"]), hash64(&[b"abd"]));
    }
}

//! Debate: topic, side assignment and win/lose scoring by a judge.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::DomainError;
use crate::assets;
use crate::backends::{hash64, strip_marker, BackendError, Classifier, OutcomeTag, RewardJudgment};
use crate::game::{normalize_label, DialogueState, GameConfig, InfoValue, PrivateInfo, ANY_LABEL};

pub const TOPIC_KEY: &str = "debate_topic";
pub const SIDE_KEY: &str = "debate_side";
pub const STYLES: [&str; 3] = ["logos", "ethos", "pathos"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    For,
    Against,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::For => "for",
            Side::Against => "against",
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::For => Side::Against,
            Side::Against => Side::For,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DebateScenario {
    pub topic: String,
    pub sides: [Side; 2],
}

pub fn topics() -> Vec<String> {
    assets::lines(assets::DEBATE_TOPICS)
}

impl DebateScenario {
    pub fn new(topic: impl Into<String>, first_side: Side) -> Self {
        DebateScenario { topic: topic.into(), sides: [first_side, first_side.opposite()] }
    }

    pub fn random(rng: &mut impl Rng) -> Self {
        let topics = topics();
        let topic = topics.choose(rng).expect("topic list is nonempty").clone();
        let side = if rng.random_bool(0.5) { Side::For } else { Side::Against };
        DebateScenario::new(topic, side)
    }

    pub fn from_config(config: &GameConfig) -> Result<Self, DomainError> {
        let mut topic = None;
        let mut sides = [Side::For; 2];
        for p in 0..2 {
            let info = &config.scenario.private_info[p];
            match info.get(TOPIC_KEY) {
                Some(InfoValue::Text(t)) => topic = Some(t.clone()),
                _ => return Err(DomainError::InvalidScenario(format!("player {p} has no topic"))),
            }
            sides[p] = match info.get(SIDE_KEY) {
                Some(InfoValue::Text(s)) if normalize_label(s) == "for" => Side::For,
                Some(InfoValue::Text(s)) if normalize_label(s) == "against" => Side::Against,
                _ => return Err(DomainError::InvalidScenario(format!("player {p} has no side"))),
            };
        }
        if sides[0] == sides[1] {
            return Err(DomainError::InvalidScenario("both players argue the same side".into()));
        }
        Ok(DebateScenario { topic: topic.expect("set above"), sides })
    }

    pub fn private_info(&self, player: usize) -> PrivateInfo {
        [
            (TOPIC_KEY.to_string(), InfoValue::Text(self.topic.clone())),
            (SIDE_KEY.to_string(), InfoValue::Text(self.sides[player].as_str().into())),
        ]
        .into()
    }
}

/// Decides which player won a debate.
pub trait DebateJudge: Send + Sync {
    fn winner(&self, config: &GameConfig, transcript: &DialogueState) -> Result<usize, BackendError>;
}

/// Deterministic judge: each reply scores its word count times a style weight in {1, 2, 3}
/// (hashed from the classified style and the topic; 1 when the style is unclear). The higher
/// total wins; ties go to player 0.
pub struct StubDebateJudge {
    classifier: Arc<dyn Classifier>,
}

impl StubDebateJudge {
    pub fn new(classifier: Arc<dyn Classifier>) -> Self {
        StubDebateJudge { classifier }
    }

    pub fn style_weight(style: &str, topic: &str) -> f64 {
        1.0 + (hash64(&[normalize_label(style).as_bytes(), b"\x1f", topic.as_bytes()]) % 3) as f64
    }
}

impl DebateJudge for StubDebateJudge {
    fn winner(&self, config: &GameConfig, transcript: &DialogueState) -> Result<usize, BackendError> {
        let topic = DebateScenario::from_config(config).map(|s| s.topic).unwrap_or_default();
        let styles: Vec<String> = config
            .action_labels
            .iter()
            .filter(|l| normalize_label(l) != ANY_LABEL)
            .cloned()
            .collect();
        let mut score = [0.0f64; 2];
        for (author, text) in transcript.replies() {
            let words = strip_marker(text).split_whitespace().count() as f64;
            let weight = if styles.is_empty() {
                1.0
            } else {
                let probs = self.classifier.classify(text, &styles)?;
                match crate::backends::argmax_set(&probs, 1e-12).as_slice() {
                    [single] => Self::style_weight(&styles[*single], &topic),
                    _ => 1.0,
                }
            };
            score[author.min(1)] += words * weight;
        }
        Ok(if score[1] > score[0] { 1 } else { 0 })
    }
}

/// Winner gets 1, loser 0.
pub fn debate_reward_oracle(
    config: &GameConfig,
    transcript: &DialogueState,
    judge: &dyn DebateJudge,
) -> Result<[f64; 2], BackendError> {
    let mut values = [0.0; 2];
    values[judge.winner(config, transcript)?.min(1)] = 1.0;
    Ok(values)
}

pub(crate) fn score_transcript(
    config: &GameConfig,
    transcript: &DialogueState,
    judge: &dyn DebateJudge,
) -> Result<RewardJudgment, BackendError> {
    let values = debate_reward_oracle(config, transcript, judge)?;
    Ok(RewardJudgment { values: values.to_vec(), outcome_tag: OutcomeTag::Valid, rationale: None })
}

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;
use std::sync::Arc;

use super::PsroError;
use crate::assets;
use crate::backends::{GenerationRequest, Generator};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProposalKind {
    /// New instruction labels.
    Label,
    /// New categories of instructions.
    Category,
    /// New labels inside the named category.
    LabelIn(String),
}

/// What a best-response operator asks its proposer for. `ranked` lists the current items
/// in ascending order of score.
#[derive(Clone, Debug, PartialEq)]
pub struct ProposalRequest {
    pub player: usize,
    pub kind: ProposalKind,
    pub ranked: Vec<(String, f64)>,
    pub count: usize,
}

/// Source of candidate instruction strings.
pub trait Proposer {
    fn propose(&mut self, request: &ProposalRequest) -> Result<Vec<String>, PsroError>;
}

/// Replays a fixed list of proposals, one per requested item, then proposes nothing.
#[derive(Clone, Debug, Default)]
pub struct ScriptedProposer {
    script: VecDeque<String>,
    pub requests: Vec<ProposalRequest>,
}

impl ScriptedProposer {
    pub fn new<I, S>(items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedProposer { script: items.into_iter().map(Into::into).collect(), requests: Vec::new() }
    }
}

impl Proposer for ScriptedProposer {
    fn propose(&mut self, request: &ProposalRequest) -> Result<Vec<String>, PsroError> {
        self.requests.push(request.clone());
        Ok((0..request.count).filter_map(|_| self.script.pop_front()).collect())
    }
}

/// Always proposes the same label.
#[derive(Clone, Debug)]
pub struct RepeatProposer(pub String);

impl Proposer for RepeatProposer {
    fn propose(&mut self, request: &ProposalRequest) -> Result<Vec<String>, PsroError> {
        Ok(vec![self.0.clone(); request.count.max(1)])
    }
}

/// Draws words from a fixed vocabulary with a seeded generator; offline stand-in for a
/// model-backed proposer.
#[derive(Clone, Debug)]
pub struct VocabularyProposer {
    vocabulary: Vec<String>,
    rng: ChaCha8Rng,
}

pub const TONE_VOCABULARY: [&str; 16] = [
    "angry", "relaxed", "enthusiastic", "friendly", "formal", "playful", "curt", "humble",
    "confident", "sarcastic", "cheerful", "patient", "urgent", "skeptical", "warm", "stern",
];

impl VocabularyProposer {
    pub fn new(vocabulary: Vec<String>, seed: u64) -> Self {
        VocabularyProposer { vocabulary, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn tones(seed: u64) -> Self {
        VocabularyProposer::new(TONE_VOCABULARY.iter().map(|s| s.to_string()).collect(), seed)
    }
}

impl Proposer for VocabularyProposer {
    fn propose(&mut self, request: &ProposalRequest) -> Result<Vec<String>, PsroError> {
        Ok((0..request.count)
            .filter_map(|_| self.vocabulary.choose(&mut self.rng).cloned())
            .map(|w| match &request.kind {
                ProposalKind::LabelIn(category) => format!("{category} {w}"),
                _ => w,
            })
            .collect())
    }
}

/// Asks a generation backend to continue a bulleted list of the current items.
pub struct LlmProposer {
    generator: Arc<dyn Generator>,
    seed: u32,
}

impl LlmProposer {
    pub fn new(generator: Arc<dyn Generator>) -> Self {
        LlmProposer { generator, seed: 0 }
    }

    pub fn prompt(request: &ProposalRequest) -> String {
        let subject = match &request.kind {
            ProposalKind::Label => "instructions for writing a negotiation message".to_owned(),
            ProposalKind::Category => "categories of instructions for writing a negotiation message".to_owned(),
            ProposalKind::LabelIn(c) => format!("instructions in the category \"{c}\""),
        };
        let mut prompt = format!("Here is a list of {subject}, from least to most effective:\n");
        for (item, _) in &request.ranked {
            prompt.push_str(&format!("- {item}\n"));
        }
        prompt.push_str(assets::PROPOSER_SUFFIX.trim_end());
        prompt.push_str(&format!(" Give {} new items.\n", request.count));
        prompt
    }

    /// Items of a `- ` bulleted answer.
    pub fn parse(answer: &str) -> Vec<String> {
        answer
            .lines()
            .filter_map(|l| l.trim().strip_prefix("- ").or_else(|| l.trim().strip_prefix("* ")))
            .map(|l| l.trim().trim_end_matches('.').to_owned())
            .filter(|l| !l.is_empty())
            .collect()
    }
}

impl Proposer for LlmProposer {
    fn propose(&mut self, request: &ProposalRequest) -> Result<Vec<String>, PsroError> {
        let answer = self.generator.generate(&GenerationRequest::new(Self::prompt(request), self.seed))?;
        self.seed = self.seed.wrapping_add(1);
        Ok(Self::parse(&answer).into_iter().take(request.count).collect())
    }
}

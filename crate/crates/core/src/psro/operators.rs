use std::collections::HashSet;

use super::proposer::{ProposalKind, ProposalRequest, Proposer};
use super::{Candidate, PsroError};
use crate::game::normalize_label;

/// Scores a label for `player` against the co-player's current meta-strategy.
pub trait Evaluator {
    fn score(&mut self, player: usize, label: &str) -> Result<f64, PsroError>;
}

impl<F: FnMut(usize, &str) -> Result<f64, PsroError>> Evaluator for F {
    fn score(&mut self, player: usize, label: &str) -> Result<f64, PsroError> {
        self(player, label)
    }
}

/// Retry budget per requested label.
pub const RETRIES_PER_LABEL: usize = 5;

fn ascending(scored: &[Candidate]) -> Vec<(String, f64)> {
    let mut ranked: Vec<(String, f64)> =
        scored.iter().map(|c| (c.label.clone(), c.score.unwrap_or(f64::NEG_INFINITY))).collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
    ranked
}

/// Collects up to `k` labels that are new with respect to `existing` and to each other.
/// Every proposed item, and every empty answer, uses one of `5k` attempts.
fn novel_labels(
    player: usize,
    kind: ProposalKind,
    ranked: Vec<(String, f64)>,
    existing: &[String],
    k: usize,
    proposer: &mut dyn Proposer,
) -> Result<Vec<String>, PsroError> {
    let mut seen: HashSet<String> = existing.iter().map(|l| normalize_label(l)).collect();
    let mut out = Vec::new();
    let budget = RETRIES_PER_LABEL * k.max(1);
    let mut attempts = 0;
    while out.len() < k && attempts < budget {
        let request = ProposalRequest { player, kind: kind.clone(), ranked: ranked.clone(), count: k - out.len() };
        let proposals = proposer.propose(&request)?;
        if proposals.is_empty() {
            attempts += 1;
            continue;
        }
        for label in proposals {
            attempts += 1;
            let label = label.trim().to_owned();
            let norm = normalize_label(&label);
            if !norm.is_empty() && seen.insert(norm) {
                out.push(label);
                if out.len() == k {
                    break;
                }
            }
            if attempts >= budget {
                break;
            }
        }
    }
    if out.is_empty() {
        return Err(PsroError::ProposerExhausted { player, attempts });
    }
    Ok(out)
}

fn score_all(player: usize, labels: Vec<String>, evaluator: &mut dyn Evaluator) -> Result<Vec<Candidate>, PsroError> {
    labels
        .into_iter()
        .map(|label| {
            let score = evaluator.score(player, &label)?;
            Ok(Candidate { label, score: Some(score) })
        })
        .collect()
}

/// Highest score; the earliest wins ties.
fn best(candidates: Vec<Candidate>) -> Candidate {
    let mut best: Option<Candidate> = None;
    for c in candidates {
        if best.as_ref().is_none_or(|b| c.score.unwrap_or(f64::NEG_INFINITY) > b.score.unwrap_or(f64::NEG_INFINITY)) {
            best = Some(c);
        }
    }
    best.expect("at least one candidate")
}

/// Shotgun best response: `k` novel labels, each scored, best returned.
pub fn br_shotgun(
    player: usize,
    current: &[Candidate],
    k: usize,
    proposer: &mut dyn Proposer,
    evaluator: &mut dyn Evaluator,
) -> Result<Candidate, PsroError> {
    let existing: Vec<String> = current.iter().map(|c| c.label.clone()).collect();
    let labels = novel_labels(player, ProposalKind::Label, ascending(current), &existing, k, proposer)?;
    Ok(best(score_all(player, labels, evaluator)?))
}

/// Result of a better-response search.
#[derive(Clone, Debug, PartialEq)]
pub struct BetterResponse {
    pub candidate: Candidate,
    pub improved: bool,
}

/// Better response: proposes one label at a time until one beats `current_score`, for at
/// most `max_attempts` proposals; otherwise the best label seen, flagged as not improved.
pub fn br_better(
    player: usize,
    current: &[Candidate],
    current_score: f64,
    proposer: &mut dyn Proposer,
    evaluator: &mut dyn Evaluator,
    max_attempts: usize,
) -> Result<BetterResponse, PsroError> {
    let mut existing: Vec<String> = current.iter().map(|c| c.label.clone()).collect();
    let mut best_seen: Option<Candidate> = None;
    let mut attempts = 0;
    while attempts < max_attempts.max(1) {
        attempts += 1;
        let request = ProposalRequest { player, kind: ProposalKind::Label, ranked: ascending(current), count: 1 };
        let Some(label) = proposer.propose(&request)?.into_iter().next() else { continue };
        let label = label.trim().to_owned();
        let norm = normalize_label(&label);
        if norm.is_empty() || existing.iter().any(|l| normalize_label(l) == norm) {
            continue;
        }
        existing.push(label.clone());
        let score = evaluator.score(player, &label)?;
        let candidate = Candidate { label, score: Some(score) };
        if score > current_score {
            return Ok(BetterResponse { candidate, improved: true });
        }
        if best_seen.as_ref().is_none_or(|b| score > b.score.unwrap_or(f64::NEG_INFINITY)) {
            best_seen = Some(candidate);
        }
    }
    match best_seen {
        Some(candidate) => Ok(BetterResponse { candidate, improved: false }),
        None => Err(PsroError::ProposerExhausted { player, attempts }),
    }
}

/// Trajectory-aware best response: the proposer sees the current labels in ascending order
/// of score and suggests `k` new ones; the best new one is returned.
pub fn br_trajectory(
    player: usize,
    scored: &[Candidate],
    k: usize,
    proposer: &mut dyn Proposer,
    evaluator: &mut dyn Evaluator,
) -> Result<Candidate, PsroError> {
    if scored.is_empty() {
        return Err(PsroError::InvalidConfig("trajectory response needs scored candidates".into()));
    }
    br_shotgun(player, scored, k, proposer, evaluator)
}

/// A category chosen by the categorical best response.
#[derive(Clone, Debug, PartialEq)]
pub struct CategoryResponse {
    pub category: String,
    pub mean_score: f64,
    pub best_label: Candidate,
}

/// Categorical best response: `k_prime` new categories, `k` labels in each; the category
/// with the highest mean label score wins (earliest on ties).
pub fn br_categorical(
    player: usize,
    categories: &[Candidate],
    k: usize,
    k_prime: usize,
    proposer: &mut dyn Proposer,
    evaluator: &mut dyn Evaluator,
) -> Result<CategoryResponse, PsroError> {
    let existing: Vec<String> = categories.iter().map(|c| c.label.clone()).collect();
    let new_categories =
        novel_labels(player, ProposalKind::Category, ascending(categories), &existing, k_prime, proposer)?;
    let mut best_response: Option<CategoryResponse> = None;
    let mut taken = existing.clone();
    for category in new_categories {
        let labels = novel_labels(player, ProposalKind::LabelIn(category.clone()), Vec::new(), &taken, k, proposer)?;
        taken.extend(labels.iter().cloned());
        let scored = score_all(player, labels, evaluator)?;
        let mean = scored.iter().map(|c| c.score.unwrap_or(0.0)).sum::<f64>() / scored.len() as f64;
        let best_label = best(scored);
        if best_response.as_ref().is_none_or(|b| mean > b.mean_score) {
            best_response = Some(CategoryResponse { category, mean_score: mean, best_label });
        }
    }
    Ok(best_response.expect("novel_labels returns at least one category"))
}

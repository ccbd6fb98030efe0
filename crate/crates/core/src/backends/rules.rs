use regex::Regex;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, LazyLock};

use super::{BackendError, OutcomeTag, RewardJudgment, RewardModel, TerminationJudge};
use crate::domains::debate::{self, DebateJudge};
use crate::domains::{fruit, meeting, patterns};
use crate::game::{DialogueState, DomainId, Event, GameConfig};

/// Terminal iff the last message accepts or rejects a proposal.
#[derive(Clone, Copy, Debug, Default)]
pub struct RuleTerminationJudge;

impl TerminationJudge for RuleTerminationJudge {
    fn judge_terminal(&self, _config: &GameConfig, thread: &DialogueState) -> Result<bool, BackendError> {
        Ok(match thread.replies().last() {
            Some((_, text)) => patterns::is_acceptance(text) || patterns::is_rejection(text),
            None => false,
        })
    }
}

/// Dispatches to the domain's rule-based reward oracle.
///
/// Transcripts the rules cannot read (an acceptance without a readable proposal) score zero
/// and are tagged incomplete; they are counted in [`GroundTruthReward::parse_failures`].
pub struct GroundTruthReward {
    judge: Arc<dyn DebateJudge>,
    parse_failures: AtomicUsize,
}

impl GroundTruthReward {
    pub fn new(judge: Arc<dyn DebateJudge>) -> Self {
        GroundTruthReward { judge, parse_failures: AtomicUsize::new(0) }
    }

    pub fn parse_failures(&self) -> usize {
        self.parse_failures.load(Ordering::Relaxed)
    }
}

impl RewardModel for GroundTruthReward {
    fn score(&self, config: &GameConfig, transcript: &DialogueState) -> Result<RewardJudgment, BackendError> {
        let outcome = match config.domain_id {
            DomainId::Fruit => fruit::score_transcript(config, transcript),
            DomainId::Meeting => meeting::score_transcript(config, transcript),
            DomainId::Debate => return debate::score_transcript(config, transcript, self.judge.as_ref()),
        };
        if outcome.parse_failure {
            self.parse_failures.fetch_add(1, Ordering::Relaxed);
        }
        Ok(outcome.judgment)
    }
}

/// Rewards read off a joint payoff table indexed by each player's last instruction.
/// Embeds a normal-form game into the dialogue tree.
#[derive(Clone, Debug)]
pub struct PayoffTableReward {
    num_actions: usize,
    cells: Vec<[f64; 2]>,
}

impl PayoffTableReward {
    /// `cells[a0 * num_actions + a1]` holds the payoffs when player 0 plays `a0`, player 1 `a1`.
    pub fn new(num_actions: usize, cells: Vec<[f64; 2]>) -> Self {
        assert_eq!(cells.len(), num_actions * num_actions, "payoff table must be square");
        PayoffTableReward { num_actions, cells }
    }

    /// Zero-sum table from player 0's payoff matrix.
    pub fn zero_sum(matrix: &[Vec<f64>]) -> Self {
        let n = matrix.len();
        let cells = matrix
            .iter()
            .flat_map(|row| row.iter().map(|&u| [u, -u]))
            .collect();
        PayoffTableReward::new(n, cells)
    }

    /// Each player's payoff depends only on their own action.
    pub fn separable(own_payoff: &[f64]) -> Self {
        let n = own_payoff.len();
        let mut cells = Vec::with_capacity(n * n);
        for a0 in 0..n {
            for a1 in 0..n {
                cells.push([own_payoff[a0], own_payoff[a1]]);
            }
        }
        PayoffTableReward::new(n, cells)
    }
}

impl RewardModel for PayoffTableReward {
    fn score(&self, _config: &GameConfig, transcript: &DialogueState) -> Result<RewardJudgment, BackendError> {
        let mut last = [None, None];
        for event in &transcript.events {
            if let Event::Decision { player, action } = event {
                if *player < 2 {
                    last[*player] = Some(*action);
                }
            }
        }
        match last {
            [Some(a0), Some(a1)] if a0 < self.num_actions && a1 < self.num_actions => {
                let cell = self.cells[a0 * self.num_actions + a1];
                Ok(RewardJudgment { values: cell.to_vec(), outcome_tag: OutcomeTag::Valid, rationale: None })
            }
            _ => Err(BackendError::Failure("payoff table needs one decision per player".into())),
        }
    }
}

static UTILITY_LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)utility\s+for\s+player\s+(\d+)\s+is\s+(-?\d+(?:\.\d+)?)").expect("valid regex")
});

/// Reads `Utility for player <i> is <x>` lines; `None` unless every player is covered.
pub fn parse_utilities(text: &str, num_players: usize) -> Option<Vec<f64>> {
    let mut values = vec![None; num_players];
    for caps in UTILITY_LINE.captures_iter(text) {
        let idx: usize = caps[1].parse().ok()?;
        let value: f64 = caps[2].parse().ok()?;
        if idx < num_players {
            values[idx] = Some(value);
        }
    }
    values.into_iter().collect()
}

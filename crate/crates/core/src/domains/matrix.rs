//! Normal-form games embedded as one-decision-per-player dialogues.
//!
//! Messages carry only the chance seed, so neither player observes the other's instruction and
//! the two decisions are effectively simultaneous.

use std::sync::Arc;

use super::base_config;
use crate::backends::{BackendBundle, PayoffTableReward, SilentGenerator};
use crate::game::{DialogueGame, DomainId, GameConfig, GameError, ANY_LABEL};

/// A config whose menu is `labels` followed by `any` (unless already present).
pub fn matrix_config(labels: &[&str], min_utility: f64, max_utility: f64) -> GameConfig {
    let mut config = base_config(DomainId::Fruit, "Row", "Column");
    config.action_labels = labels.iter().map(|s| s.to_string()).collect();
    if !labels.contains(&ANY_LABEL) {
        config.action_labels.push(ANY_LABEL.to_string());
    }
    config.num_llm_seeds = 1;
    config.num_max_replies = 1;
    config.min_utility = min_utility;
    config.max_utility = max_utility;
    config.header_template = "Row and Column each pick a move.".to_string();
    config.scenario.opening_message = "Let us play.".to_string();
    config
}

/// The game whose rewards are `table[(a0, a1)]`, with player 0 the row player.
pub fn matrix_game(config: GameConfig, table: PayoffTableReward) -> Result<DialogueGame, GameError> {
    let backends = BackendBundle::default().with_generator(Arc::new(SilentGenerator)).with_reward(Arc::new(table));
    DialogueGame::new(config, backends)
}

/// How the mandatory `any` instruction enters a matrix game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AnyEmbedding {
    /// `any` is an uninformative instruction: it plays a uniformly random concrete move, so its
    /// payoffs are the averages of the concrete rows and columns. Matches the stub generator.
    #[default]
    Uniform,
    /// `any` loses 2 to every concrete move and draws against itself, which makes the
    /// equilibrium over the concrete moves unique.
    Dominated,
}

/// Row payoffs of a zero-sum game extended by an `any` action.
pub fn with_any(matrix: &[Vec<f64>], embedding: AnyEmbedding) -> Vec<Vec<f64>> {
    let n = matrix.len();
    let m = matrix[0].len();
    let (col, row, corner): (Vec<f64>, Vec<f64>, f64) = match embedding {
        AnyEmbedding::Uniform => {
            let col: Vec<f64> = matrix.iter().map(|r| r.iter().sum::<f64>() / m as f64).collect();
            let row: Vec<f64> = (0..m).map(|c| matrix.iter().map(|r| r[c]).sum::<f64>() / n as f64).collect();
            let corner = col.iter().sum::<f64>() / n as f64;
            (col, row, corner)
        }
        AnyEmbedding::Dominated => (vec![2.0; n], vec![-2.0; m], 0.0),
    };
    let mut out: Vec<Vec<f64>> = matrix
        .iter()
        .zip(&col)
        .map(|(r, c)| {
            let mut r = r.clone();
            r.push(*c);
            r
        })
        .collect();
    let mut last = row;
    last.push(corner);
    out.push(last);
    out
}

fn zero_sum_game(labels: &[&str], matrix: &[Vec<f64>], embedding: AnyEmbedding) -> Result<DialogueGame, GameError> {
    let extended = with_any(matrix, embedding);
    matrix_game(matrix_config(labels, -2.0, 2.0), PayoffTableReward::zero_sum(&extended))
}

pub fn matching_pennies(embedding: AnyEmbedding) -> Result<DialogueGame, GameError> {
    zero_sum_game(&["heads", "tails"], &[vec![1.0, -1.0], vec![-1.0, 1.0]], embedding)
}

pub fn rock_paper_scissors(embedding: AnyEmbedding) -> Result<DialogueGame, GameError> {
    zero_sum_game(
        &["rock", "paper", "scissors"],
        &[vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]],
        embedding,
    )
}

/// Probability of each concrete move once `any` is resolved uniformly.
pub fn effective_play(probs: &[f64]) -> Vec<f64> {
    let n = probs.len() - 1;
    probs[..n].iter().map(|p| p + probs[n] / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_any_is_the_bilinear_extension() {
        let m = with_any(&[vec![1.0, -1.0], vec![-1.0, 1.0]], AnyEmbedding::Uniform);
        assert_eq!(m, vec![vec![1.0, -1.0, 0.0], vec![-1.0, 1.0, 0.0], vec![0.0, 0.0, 0.0]]);
    }

    #[test]
    fn dominated_any_loses_everywhere() {
        let m = with_any(&[vec![0.0, 1.0], vec![1.0, 0.0]], AnyEmbedding::Dominated);
        assert_eq!(m[2], vec![-2.0, -2.0, 0.0]);
        assert_eq!(m[0][2], 2.0);
    }
}

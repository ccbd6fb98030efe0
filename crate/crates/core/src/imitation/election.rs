use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::embed::Embedder;
use super::mlp::MlpPolicy;
use crate::backends::{hash64, BackendBundle};
use crate::game::{DialogueGame, DialogueState, GameConfig, GameError, ANY_LABEL};
use crate::nfg::{regret_matching_cce, JointDistribution, PayoffTensor};
use crate::psro::{rollout, seed_tuple};

/// An agent that picks an instruction at each of its decision nodes.
pub trait AgentPolicy: Send + Sync {
    fn name(&self) -> &str;

    /// `rollout` distinguishes repeated plays so that sampling agents draw fresh choices.
    fn choose(&self, game: &DialogueGame, state: &DialogueState, player: usize, rollout: u64) -> usize;
}

/// Always plays the unconstrained "any" instruction, or action 0 when the menu has none.
#[derive(Clone, Debug, Default)]
pub struct BaselineAgent;

impl AgentPolicy for BaselineAgent {
    fn name(&self) -> &str {
        "baseline"
    }

    fn choose(&self, game: &DialogueGame, _state: &DialogueState, _player: usize, _rollout: u64) -> usize {
        game.config().action_labels.iter().position(|l| l == ANY_LABEL).unwrap_or(0)
    }
}

/// Samples one instruction from the imitation network's distribution at the current infostate.
pub struct ImitationAgent<E: Embedder> {
    pub policy: MlpPolicy<f64>,
    pub embedder: E,
    pub sample_seed: u64,
}

impl<E: Embedder> ImitationAgent<E> {
    pub fn distribution(&self, game: &DialogueGame, state: &DialogueState, player: usize) -> Vec<f64> {
        let key = game.infostate_key(state, player).canonical();
        let x = self.embedder.embed(&key);
        match self.policy.forward(&x) {
            Ok(p) if p.len() == game.num_actions() => p,
            _ => crate::num::uniform(game.num_actions()),
        }
    }
}

impl<E: Embedder> AgentPolicy for ImitationAgent<E> {
    fn name(&self) -> &str {
        "imitation"
    }

    fn choose(&self, game: &DialogueGame, state: &DialogueState, player: usize, rollout: u64) -> usize {
        let probs = self.distribution(game, state, player);
        let key = game.infostate_key(state, player).canonical();
        let seed = hash64(&[
            key.as_bytes(),
            &rollout.to_le_bytes(),
            &self.sample_seed.to_le_bytes(),
        ]);
        let u: f64 = ChaCha8Rng::seed_from_u64(seed).random();
        let mut acc = 0.0;
        for (a, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return a;
            }
        }
        probs.len() - 1
    }
}

#[derive(Clone, Debug)]
pub struct ElectionResult {
    pub options: Vec<String>,
    pub tensor: PayoffTensor<f64>,
    pub joint: JointDistribution<f64>,
    /// Per option, the mean of its row and column marginal mass.
    pub mass: Vec<f64>,
}

/// Solves an election tensor directly; option `i` is row `i` and column `i`.
pub fn election_from_tensor(tensor: PayoffTensor<f64>, iterations: usize) -> ElectionResult {
    let joint = regret_matching_cce(&tensor, iterations);
    let (row, col) = joint.marginals();
    let mass = row.iter().zip(&col).map(|(r, c)| 0.5 * (r + c)).collect();
    ElectionResult { options: tensor.row_labels.clone(), tensor, joint, mass }
}

/// Expected payoffs of every ordered option pair, estimated by rollouts on each config.
///
/// Cell `(i, j)` seats option `i` as player 0 and option `j` as player 1. Rollout `r` plays seed
/// tuple `r` so that every cell sees the same chance draws.
pub fn election_tensor(
    configs: &[GameConfig],
    options: &[&dyn AgentPolicy],
    backends: &BackendBundle,
    rollouts: usize,
) -> Result<PayoffTensor<f64>, GameError> {
    let k = options.len();
    let per_config: Result<Vec<Vec<[f64; 2]>>, GameError> = configs
        .par_iter()
        .map(|config| {
            let game = DialogueGame::new(config.clone(), backends.clone())?;
            let mut sums = vec![[0.0; 2]; k * k];
            for i in 0..k {
                for j in 0..k {
                    for r in 0..rollouts {
                        let seeds = seed_tuple(config, r);
                        let seat = [options[i], options[j]];
                        let returns = rollout(&game, |s, p| seat[p].choose(&game, s, p, r as u64), &seeds)?;
                        sums[i * k + j][0] += returns[0];
                        sums[i * k + j][1] += returns[1];
                    }
                }
            }
            Ok(sums)
        })
        .collect();
    let denom = (configs.len() * rollouts.max(1)) as f64;
    let mut values = vec![[0.0; 2]; k * k];
    for sums in per_config? {
        for (v, s) in values.iter_mut().zip(sums) {
            v[0] += s[0] / denom;
            v[1] += s[1] / denom;
        }
    }
    let labels: Vec<String> = options.iter().map(|o| o.name().to_string()).collect();
    PayoffTensor::new(labels.clone(), labels, values).map_err(|e| GameError::ConfigInvalid(e.to_string()))
}

/// Two players elect one agent to play for both; returns each option's selection mass.
pub fn meta_game_election(
    configs: &[GameConfig],
    options: &[&dyn AgentPolicy],
    backends: &BackendBundle,
    rollouts: usize,
    rm_iterations: usize,
) -> Result<ElectionResult, GameError> {
    if options.len() < 2 {
        return Err(GameError::ConfigInvalid("an election needs at least two options".into()));
    }
    let tensor = election_tensor(configs, options, backends, rollouts)?;
    Ok(election_from_tensor(tensor, rm_iterations))
}

use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::Mutex;

use super::PsroError;
use crate::backends::BackendBundle;
use crate::game::{normalize_label, DialogueGame, DialogueState, GameConfig, GameError, Move, NodeKind, ANY_LABEL};
use crate::nfg::PayoffTensor;

/// Plays one dialogue: `choose` picks the instruction at each decision node, chance nodes take
/// seeds from `seeds` in order (seed 0 once it runs dry).
pub fn rollout(
    game: &DialogueGame,
    mut choose: impl FnMut(&DialogueState, usize) -> usize,
    seeds: &[u32],
) -> Result<Vec<f64>, GameError> {
    let mut state = game.root();
    let mut next_seed = seeds.iter().copied();
    loop {
        state = match game.node_kind(&state) {
            NodeKind::Terminal => return game.returns(&state),
            NodeKind::Decision(player) => {
                let a = choose(&state, player);
                game.apply(&state, Move::Action(a))?
            }
            NodeKind::Chance => game.apply(&state, Move::Seed(next_seed.next().unwrap_or(0)))?,
        };
    }
}

/// Number of chance nodes on the longest path.
pub fn chance_depth(config: &GameConfig) -> usize {
    config.num_players * config.num_max_replies as usize
}

/// Seed tuple number `index` in base `num_llm_seeds`, least significant first.
pub fn seed_tuple(config: &GameConfig, mut index: usize) -> Vec<u32> {
    let base = config.num_llm_seeds as usize;
    (0..chance_depth(config))
        .map(|_| {
            let digit = index % base;
            index /= base;
            digit as u32
        })
        .collect()
}

/// The scenarios a PSRO run plays on. Labels in the configs are replaced per cell.
#[derive(Clone, Debug)]
pub struct GameFamily {
    pub configs: Vec<GameConfig>,
}

impl GameFamily {
    pub fn new(configs: Vec<GameConfig>) -> Self {
        assert!(!configs.is_empty(), "a game family needs at least one scenario");
        GameFamily { configs }
    }

    /// Size of the (scenario × seed tuple) schedule.
    pub fn schedule_len(&self) -> usize {
        let tuples = self
            .configs
            .iter()
            .map(|c| (c.num_llm_seeds as usize).pow(chance_depth(c) as u32))
            .max()
            .unwrap_or(1);
        self.configs.len() * tuples
    }

    /// Rollout `i` of a cell: round-robin over scenarios first, then seed tuples.
    pub fn schedule(&self, i: usize, offset: usize) -> (usize, usize) {
        let t = (i + offset) % self.schedule_len();
        (t % self.configs.len(), t / self.configs.len())
    }
}

/// Config whose menu holds the two forced labels (and `any`), with their indices.
pub fn cell_config(base: &GameConfig, labels: [&str; 2]) -> (GameConfig, [usize; 2]) {
    let mut config = base.clone();
    let mut menu: Vec<String> = Vec::new();
    let mut index = [0; 2];
    for (p, label) in labels.iter().enumerate() {
        let norm = normalize_label(label);
        index[p] = match menu.iter().position(|l| normalize_label(l) == norm) {
            Some(i) => i,
            None => {
                menu.push(label.trim().to_owned());
                menu.len() - 1
            }
        };
    }
    if !menu.iter().any(|l| normalize_label(l) == ANY_LABEL) {
        menu.push(ANY_LABEL.to_owned());
    }
    config.action_labels = menu;
    (config, index)
}

/// Estimates head-to-head payoffs of instruction labels by simulated dialogues; cells are cached
/// by normalized label pair.
pub struct PayoffEstimator {
    family: GameFamily,
    backends: BackendBundle,
    rollouts_per_cell: usize,
    offset: usize,
    cache: Mutex<HashMap<(String, String), [f64; 2]>>,
}

impl PayoffEstimator {
    pub fn new(family: GameFamily, backends: BackendBundle, rollouts_per_cell: usize, run_seed: u64) -> Self {
        let offset = (run_seed % family.schedule_len() as u64) as usize;
        PayoffEstimator {
            family,
            backends,
            rollouts_per_cell: rollouts_per_cell.max(1),
            offset,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn family(&self) -> &GameFamily {
        &self.family
    }

    /// Mean returns when player 0 always plays `row` and player 1 always plays `col`.
    pub fn cell(&self, row: &str, col: &str) -> Result<[f64; 2], PsroError> {
        let key = (normalize_label(row), normalize_label(col));
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let mut games: HashMap<usize, (DialogueGame, [usize; 2])> = HashMap::new();
        let mut total = [0.0; 2];
        for i in 0..self.rollouts_per_cell {
            let (scenario, tuple) = self.family.schedule(i, self.offset);
            if !games.contains_key(&scenario) {
                let (config, idx) = cell_config(&self.family.configs[scenario], [row, col]);
                games.insert(scenario, (DialogueGame::new(config, self.backends.clone())?, idx));
            }
            let (game, idx) = &games[&scenario];
            let seeds = seed_tuple(game.config(), tuple);
            let r = rollout(game, |_, p| idx[p], &seeds)?;
            total[0] += r[0];
            total[1] += r[1];
        }
        let n = self.rollouts_per_cell as f64;
        let value = [total[0] / n, total[1] / n];
        self.cache.lock().expect("cache lock").insert(key, value);
        Ok(value)
    }

    /// Full tensor over the given label sets; cells are estimated in parallel.
    pub fn tensor(&self, rows: &[String], cols: &[String]) -> Result<PayoffTensor<f64>, PsroError> {
        let cells: Vec<(usize, usize)> = (0..rows.len()).flat_map(|r| (0..cols.len()).map(move |c| (r, c))).collect();
        let values: Result<Vec<[f64; 2]>, PsroError> =
            cells.par_iter().map(|&(r, c)| self.cell(&rows[r], &cols[c])).collect();
        Ok(PayoffTensor::new(rows.to_vec(), cols.to_vec(), values?)?)
    }
}

/// Tensor of mean returns for every label pair; see [`PayoffEstimator`].
pub fn estimate_payoff_tensor(
    rows: &[String],
    cols: &[String],
    family: &GameFamily,
    backends: &BackendBundle,
    rollouts_per_cell: usize,
    run_seed: u64,
) -> Result<PayoffTensor<f64>, PsroError> {
    PayoffEstimator::new(family.clone(), backends.clone(), rollouts_per_cell, run_seed).tensor(rows, cols)
}

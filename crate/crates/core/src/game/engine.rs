use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use super::config::GameConfig;
use super::infostate::InfostateKey;
use super::prompt::{format_prompt, render_thread};
use super::state::{DialogueState, Event, Move, NodeKind};
use super::GameError;
use crate::backends::{BackendBundle, GenerationRequest, RewardJudgment, Steering};

/// Backend calls issued by one game, per capability.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallStats {
    pub generate: usize,
    pub terminate: usize,
    pub reward: usize,
}

impl CallStats {
    pub fn total(&self) -> usize {
        self.generate + self.terminate + self.reward
    }
}

/// Exported record of one finished dialogue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub config_hash: String,
    pub events: Vec<Event>,
    pub returns: Option<Vec<f64>>,
}

type GenKey = (InfostateKey, usize, u32);

/// A dialogue game bound to a backend bundle.
///
/// Every backend answer is memoized: generations by (mover infostate, action, seed), termination
/// verdicts by the rendered thread, rewards by the full event list (a reward may read hidden
/// decisions). Memos are single-assignment; concurrent first writers insert equal values.
pub struct DialogueGame {
    config: Arc<GameConfig>,
    backends: BackendBundle,
    generations: Mutex<HashMap<GenKey, String>>,
    verdicts: Mutex<HashMap<String, bool>>,
    rewards: Mutex<HashMap<Vec<Event>, RewardJudgment>>,
    generate_calls: AtomicUsize,
    terminate_calls: AtomicUsize,
    reward_calls: AtomicUsize,
}

impl DialogueGame {
    pub fn new(config: GameConfig, backends: BackendBundle) -> Result<Self, GameError> {
        config.validate()?;
        Ok(DialogueGame {
            config: Arc::new(config),
            backends,
            generations: Mutex::new(HashMap::new()),
            verdicts: Mutex::new(HashMap::new()),
            rewards: Mutex::new(HashMap::new()),
            generate_calls: AtomicUsize::new(0),
            terminate_calls: AtomicUsize::new(0),
            reward_calls: AtomicUsize::new(0),
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn backends(&self) -> &BackendBundle {
        &self.backends
    }

    pub fn num_players(&self) -> usize {
        self.config.num_players
    }

    pub fn num_actions(&self) -> usize {
        self.config.num_actions()
    }

    /// The opening message alone; its receiver moves first.
    pub fn root(&self) -> DialogueState {
        DialogueState::root(&self.config)
    }

    pub fn node_kind(&self, state: &DialogueState) -> NodeKind {
        state.node_kind(self.config.num_players)
    }

    pub fn legal_actions(&self, state: &DialogueState) -> Result<Vec<usize>, GameError> {
        match self.node_kind(state) {
            NodeKind::Decision(_) => Ok((0..self.config.num_actions()).collect()),
            found => Err(GameError::WrongNodeKind { expected: "decision", found }),
        }
    }

    /// Seeds `0..num_llm_seeds`, uniformly weighted.
    pub fn chance_outcomes(&self, state: &DialogueState) -> Result<Vec<(u32, f64)>, GameError> {
        match self.node_kind(state) {
            NodeKind::Chance => {
                let n = self.config.num_llm_seeds;
                Ok((0..n).map(|s| (s, 1.0 / n as f64)).collect())
            }
            found => Err(GameError::WrongNodeKind { expected: "chance", found }),
        }
    }

    pub fn infostate_key(&self, state: &DialogueState, player: usize) -> InfostateKey {
        InfostateKey::new(&self.config, state, player)
    }

    /// Child state; the parent is left untouched.
    pub fn apply(&self, state: &DialogueState, mv: Move) -> Result<DialogueState, GameError> {
        match (self.node_kind(state), mv) {
            (NodeKind::Decision(player), Move::Action(action)) => {
                if action >= self.config.num_actions() {
                    return Err(GameError::IllegalAction(format!(
                        "action {action} outside 0..{}",
                        self.config.num_actions()
                    )));
                }
                let mut child = state.clone();
                child.events.push(Event::Decision { player, action });
                Ok(child)
            }
            (NodeKind::Chance, Move::Seed(seed)) => self.realize(state, seed),
            (NodeKind::Terminal, _) => Err(GameError::IllegalAction("game is over".into())),
            (NodeKind::Decision(_), Move::Seed(_)) => {
                Err(GameError::IllegalAction("a seed cannot be played at a decision node".into()))
            }
            (NodeKind::Chance, Move::Action(_)) => {
                Err(GameError::IllegalAction("an action cannot be played at a chance node".into()))
            }
        }
    }

    pub fn apply_action(&self, state: &DialogueState, action: usize) -> Result<DialogueState, GameError> {
        self.apply(state, Move::Action(action))
    }

    pub fn apply_seed(&self, state: &DialogueState, seed: u32) -> Result<DialogueState, GameError> {
        self.apply(state, Move::Seed(seed))
    }

    fn realize(&self, state: &DialogueState, seed: u32) -> Result<DialogueState, GameError> {
        if seed >= self.config.num_llm_seeds {
            return Err(GameError::IllegalAction(format!(
                "seed {seed} outside 0..{}",
                self.config.num_llm_seeds
            )));
        }
        let Some(&Event::Decision { player, action }) = state.last_event() else {
            unreachable!("chance nodes follow a decision");
        };
        let mut parent = state.clone();
        parent.events.pop();
        let text = self.generate(&parent, player, action, seed)?;

        let mut child = state.clone();
        child.events.push(Event::Chance { seed });
        child.events.push(Event::Message { player, text });
        child.reply_counts[player] += 1;

        let next = child.next_mover(self.config.num_players);
        let capped = child.reply_counts[next] >= self.config.num_max_replies;
        if capped || self.judge(&child)? {
            child.terminal_flag = true;
            child.cached_returns = Some(self.score(&child)?);
        }
        Ok(child)
    }

    fn generate(&self, parent: &DialogueState, player: usize, action: usize, seed: u32) -> Result<String, GameError> {
        let key = (self.infostate_key(parent, player), action, seed);
        if let Some(text) = self.generations.lock().expect("memo lock").get(&key) {
            return Ok(text.clone());
        }
        let mut request = GenerationRequest::new(format_prompt(&self.config, parent, player, action)?, seed);
        request.max_tokens = self.config.max_tokens;
        request.steering = Some(Steering {
            domain: self.config.domain_id,
            instructed: self.config.action_labels[action].clone(),
            labels: self.config.action_labels.clone(),
        });
        self.generate_calls.fetch_add(1, Ordering::Relaxed);
        let text = self.backends.generator.generate(&request)?;
        self.generations.lock().expect("memo lock").entry(key).or_insert_with(|| text.clone());
        Ok(text)
    }

    fn judge(&self, state: &DialogueState) -> Result<bool, GameError> {
        let thread = render_thread(&self.config, state);
        if let Some(v) = self.verdicts.lock().expect("memo lock").get(&thread) {
            return Ok(*v);
        }
        self.terminate_calls.fetch_add(1, Ordering::Relaxed);
        let verdict = self.backends.terminator.judge_terminal(&self.config, state)?;
        self.verdicts.lock().expect("memo lock").insert(thread, verdict);
        Ok(verdict)
    }

    /// The full reward judgment of a terminal state, values clamped into the utility range.
    pub fn judgment(&self, state: &DialogueState) -> Result<RewardJudgment, GameError> {
        if self.node_kind(state) != NodeKind::Terminal {
            return Err(GameError::NotTerminal);
        }
        if let Some(j) = self.rewards.lock().expect("memo lock").get(&state.events) {
            return Ok(j.clone());
        }
        self.reward_calls.fetch_add(1, Ordering::Relaxed);
        let mut judgment = self.backends.reward.score(&self.config, state)?;
        judgment.values.resize(self.config.num_players, 0.0);
        judgment.clamp_into(self.config.min_utility, self.config.max_utility);
        self.rewards.lock().expect("memo lock").insert(state.events.clone(), judgment.clone());
        Ok(judgment)
    }

    fn score(&self, state: &DialogueState) -> Result<Vec<f64>, GameError> {
        self.judgment(state).map(|j| j.values)
    }

    /// Per-player payoffs of a terminal state.
    pub fn returns(&self, state: &DialogueState) -> Result<Vec<f64>, GameError> {
        if self.node_kind(state) != NodeKind::Terminal {
            return Err(GameError::NotTerminal);
        }
        match &state.cached_returns {
            Some(r) => Ok(r.clone()),
            None => self.score(state),
        }
    }

    pub fn transcript(&self, state: &DialogueState) -> Transcript {
        Transcript {
            config_hash: self.config.config_hash(),
            events: state.events.clone(),
            returns: state.cached_returns.clone(),
        }
    }

    pub fn stats(&self) -> CallStats {
        CallStats {
            generate: self.generate_calls.load(Ordering::Relaxed),
            terminate: self.terminate_calls.load(Ordering::Relaxed),
            reward: self.reward_calls.load(Ordering::Relaxed),
        }
    }

    /// Distinct memoized entries; an upper bound on the calls a deterministic backend needs.
    pub fn distinct_transitions(&self) -> CallStats {
        CallStats {
            generate: self.generations.lock().expect("memo lock").len(),
            terminate: self.verdicts.lock().expect("memo lock").len(),
            reward: self.rewards.lock().expect("memo lock").len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{extract_marker, StubProfile};
    use crate::domains::example_fruit_config;

    fn game() -> DialogueGame {
        DialogueGame::new(example_fruit_config(), BackendBundle::stub(StubProfile::default())).unwrap()
    }

    #[test]
    fn root_lets_the_receiver_move() {
        let g = game();
        let root = g.root();
        assert_eq!(root.events.len(), 1);
        assert_eq!(g.node_kind(&root), NodeKind::Decision(1));
        assert_eq!(g.legal_actions(&root).unwrap(), vec![0, 1, 2, 3]);
        assert!(g.chance_outcomes(&root).is_err());
    }

    #[test]
    fn chance_is_uniform_over_seeds() {
        let g = game();
        let s = g.apply_action(&g.root(), 0).unwrap();
        assert_eq!(g.node_kind(&s), NodeKind::Chance);
        assert_eq!(g.chance_outcomes(&s).unwrap(), vec![(0, 0.5), (1, 0.5)]);
        assert!(g.legal_actions(&s).is_err());
    }

    #[test]
    fn transitions_are_memoized() {
        let g = game();
        let s = g.apply_action(&g.root(), 0).unwrap();
        let a = g.apply_seed(&s, 0).unwrap();
        let b = g.apply_seed(&s, 0).unwrap();
        assert_eq!(a, b);
        assert_eq!(g.stats().generate, 1);
        let (_, text) = a.last_message().unwrap();
        assert_eq!(extract_marker(text).as_deref(), Some("calm"));
    }

    #[test]
    fn non_terminal_has_no_returns() {
        let g = game();
        assert_eq!(g.returns(&g.root()), Err(GameError::NotTerminal));
    }

    #[test]
    fn depth_cap_ends_the_game() {
        let g = game();
        let mut s = g.root();
        while g.node_kind(&s) != NodeKind::Terminal {
            s = match g.node_kind(&s) {
                NodeKind::Decision(_) => g.apply_action(&s, 3).unwrap(),
                _ => g.apply_seed(&s, 1).unwrap(),
            };
        }
        assert!(s.reply_counts.iter().all(|c| *c <= 1));
        assert!(s.cached_returns.is_some());
    }
}

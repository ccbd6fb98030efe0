use serde::{Deserialize, Serialize};
use std::fmt;

use super::config::{canonical_private, GameConfig};
use super::prompt::render_thread;
use super::state::DialogueState;

/// What `player` knows at a history: the public thread, their own instruction history and
/// their own private information. Co-player decisions and private info never enter the key.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InfostateKey {
    pub player: usize,
    pub public_thread: String,
    pub own_actions: Vec<usize>,
    pub own_private: String,
}

impl InfostateKey {
    pub fn new(config: &GameConfig, state: &DialogueState, player: usize) -> Self {
        InfostateKey {
            player,
            public_thread: render_thread(config, state),
            own_actions: state.actions_of(player),
            own_private: canonical_private(&config.scenario.private_info[player]),
        }
    }

    /// Stable text form; used as the policy-table key and as embedder input.
    pub fn canonical(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for InfostateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let actions: Vec<String> = self.own_actions.iter().map(|a| a.to_string()).collect();
        write!(
            f,
            "player: {}\nactions: [{}]\nprivate: {}\nthread:\n{}",
            self.player,
            actions.join(","),
            self.own_private,
            self.public_thread
        )
    }
}

use serde::{Deserialize, Serialize};

use super::config::GameConfig;

/// One step of a dialogue history.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq, Hash)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Event {
    Decision { player: usize, action: usize },
    Chance { seed: u32 },
    Message { player: usize, text: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Decision(usize),
    Chance,
    Terminal,
}

/// What to apply at a node: an instruction index at a decision node, a seed at a chance node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    Action(usize),
    Seed(u32),
}

/// A history `h`: the opening message followed by (decision, chance, message) triples.
///
/// States are immutable values; transitions produce new states.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct DialogueState {
    pub events: Vec<Event>,
    pub reply_counts: Vec<u32>,
    pub terminal_flag: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cached_returns: Option<Vec<f64>>,
}

impl DialogueState {
    pub fn root(config: &GameConfig) -> Self {
        DialogueState {
            events: vec![Event::Message {
                player: config.sender_index(),
                text: config.scenario.opening_message.clone(),
            }],
            reply_counts: vec![0; config.num_players],
            terminal_flag: false,
            cached_returns: None,
        }
    }

    /// A finished transcript built from plain messages, as used by the reward-evaluation
    /// templates. Only the first message is treated as the scenario opening.
    pub fn from_messages(num_players: usize, messages: &[(usize, String)]) -> Self {
        let mut reply_counts = vec![0; num_players];
        for (author, _) in messages.iter().skip(1) {
            reply_counts[*author] += 1;
        }
        DialogueState {
            events: messages
                .iter()
                .map(|(player, text)| Event::Message { player: *player, text: text.clone() })
                .collect(),
            reply_counts,
            terminal_flag: true,
            cached_returns: None,
        }
    }

    pub fn last_event(&self) -> Option<&Event> {
        self.events.last()
    }

    /// Messages in order, opening message included.
    pub fn messages(&self) -> impl Iterator<Item = (usize, &str)> {
        self.events.iter().filter_map(|e| match e {
            Event::Message { player, text } => Some((*player, text.as_str())),
            _ => None,
        })
    }

    /// Messages written during play (the opening message excluded).
    pub fn replies(&self) -> impl Iterator<Item = (usize, &str)> {
        self.messages().skip(1)
    }

    pub fn last_message(&self) -> Option<(usize, &str)> {
        self.messages().last()
    }

    /// Instruction indices chosen by `player`, in order.
    pub fn actions_of(&self, player: usize) -> Vec<usize> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::Decision { player: p, action } if *p == player => Some(*action),
                _ => None,
            })
            .collect()
    }

    /// The player to act after the last message: the co-player of its author.
    pub fn next_mover(&self, num_players: usize) -> usize {
        match self.last_message() {
            Some((author, _)) => (author + 1) % num_players,
            None => 0,
        }
    }

    pub fn node_kind(&self, num_players: usize) -> NodeKind {
        if self.terminal_flag {
            return NodeKind::Terminal;
        }
        match self.last_event() {
            Some(Event::Decision { .. }) => NodeKind::Chance,
            _ => NodeKind::Decision(self.next_mover(num_players)),
        }
    }

    pub fn num_replies(&self) -> u32 {
        self.reply_counts.iter().sum()
    }
}

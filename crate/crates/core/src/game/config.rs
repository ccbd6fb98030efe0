use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use super::GameError;
use crate::assets;

/// The label every action menu must contain: the uninformative baseline instruction.
pub const ANY_LABEL: &str = "any";

/// Lowercase, trimmed form used for label equality.
pub fn normalize_label(label: &str) -> String {
    label.trim().to_lowercase()
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum DomainId {
    Meeting,
    Fruit,
    Debate,
}

impl DomainId {
    pub const ALL: [DomainId; 3] = [DomainId::Debate, DomainId::Meeting, DomainId::Fruit];

    pub fn as_str(self) -> &'static str {
        match self {
            DomainId::Meeting => "meeting",
            DomainId::Fruit => "fruit",
            DomainId::Debate => "debate",
        }
    }

    /// Title of the banner framing every message in this domain's threads.
    pub fn message_banner(self) -> &'static str {
        match self {
            DomainId::Meeting => "Schedule Proposal Message",
            DomainId::Fruit => "Trade Proposal Message",
            DomainId::Debate => "Debate Message",
        }
    }

    pub fn default_header(self) -> &'static str {
        match self {
            DomainId::Meeting => assets::HEADER_MEETING,
            DomainId::Fruit => assets::HEADER_FRUIT,
            DomainId::Debate => assets::HEADER_DEBATE,
        }
    }

    /// Instruction line used when the config does not override it. `{action}` is the label.
    pub fn default_instruction(self) -> &'static str {
        match self {
            DomainId::Meeting => "Day: Propose to meet on {action}.",
            DomainId::Fruit => "Tone: Use a {action} tone.",
            DomainId::Debate => "Argument Style: Use a {action} argument.",
        }
    }
}

impl fmt::Display for DomainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DomainId {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalize_label(s).as_str() {
            "meeting" | "meeting_scheduling" => Ok(DomainId::Meeting),
            "fruit" | "trade_fruit" | "fruit_trading" => Ok(DomainId::Fruit),
            "debate" => Ok(DomainId::Debate),
            other => Err(GameError::ConfigInvalid(format!("unknown domain_id `{other}`"))),
        }
    }
}

/// One field of a player's private information.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(untagged)]
pub enum InfoValue {
    Number(f64),
    Text(String),
    List(Vec<String>),
    Table(BTreeMap<String, f64>),
}

impl InfoValue {
    /// Rendering used inside prompt headers.
    pub fn render(&self) -> String {
        match self {
            InfoValue::Number(x) => format_number(*x),
            InfoValue::Text(s) => s.clone(),
            InfoValue::List(items) => items.join(", "),
            InfoValue::Table(table) => table
                .iter()
                .map(|(k, v)| format!("{k}: {}", format_number(*v)))
                .collect::<Vec<_>>()
                .join("\n"),
        }
    }

    fn write_canonical(&self, out: &mut String) {
        match self {
            InfoValue::Number(x) => out.push_str(&format_number(*x)),
            InfoValue::Text(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
            InfoValue::List(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&serde_json::to_string(item).expect("string serializes"));
                }
                out.push(']');
            }
            InfoValue::Table(table) => {
                out.push('{');
                for (i, (k, v)) in table.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&serde_json::to_string(k).expect("string serializes"));
                    out.push(':');
                    out.push_str(&format_number(*v));
                }
                out.push('}');
            }
        }
    }
}

/// Shortest round-trip decimal form (`1` rather than `1.0`).
pub fn format_number(x: f64) -> String {
    format!("{x}")
}

pub type PrivateInfo = BTreeMap<String, InfoValue>;

/// Canonical serialization of a private-info map: sorted keys, shortest numbers.
pub fn canonical_private(info: &PrivateInfo) -> String {
    let mut out = String::from("{");
    for (i, (k, v)) in info.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&serde_json::to_string(k).expect("string serializes"));
        out.push(':');
        v.write_canonical(&mut out);
    }
    out.push('}');
    out
}

/// Initial context of a dialogue.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Scenario {
    pub opening_message: String,
    pub sender: String,
    pub receiver: String,
    /// Indexed like `GameConfig::player_names`.
    pub private_info: Vec<PrivateInfo>,
}

/// Declarative description of one dialogue game.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct GameConfig {
    pub num_players: usize,
    pub action_labels: Vec<String>,
    pub num_llm_seeds: u32,
    pub num_max_replies: u32,
    pub min_utility: f64,
    pub max_utility: f64,
    pub domain_id: DomainId,
    pub header_template: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instruction_template: Option<String>,
    pub scenario: Scenario,
    pub player_names: Vec<String>,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
}

fn default_max_tokens() -> u32 {
    256
}

impl GameConfig {
    pub fn from_json(text: &str) -> Result<Self, GameError> {
        let config: GameConfig =
            serde_json::from_str(text).map_err(|e| GameError::ConfigInvalid(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), GameError> {
        let invalid = |msg: String| Err(GameError::ConfigInvalid(msg));
        if self.num_players != 2 {
            return invalid(format!("num_players must be 2, got {}", self.num_players));
        }
        if self.action_labels.is_empty() {
            return invalid("action_labels is empty".into());
        }
        let mut seen = HashSet::new();
        for label in &self.action_labels {
            let norm = normalize_label(label);
            if norm.is_empty() {
                return invalid("empty action label".into());
            }
            if !seen.insert(norm) {
                return invalid(format!("duplicate action label `{label}`"));
            }
        }
        if !seen.contains(ANY_LABEL) {
            return invalid("action_labels must contain \"any\"".into());
        }
        if self.num_llm_seeds == 0 {
            return invalid("num_llm_seeds must be at least 1".into());
        }
        if self.num_max_replies == 0 {
            return invalid("num_max_replies must be at least 1".into());
        }
        if !(self.min_utility.is_finite() && self.max_utility.is_finite())
            || self.min_utility >= self.max_utility
        {
            return invalid(format!(
                "utility range [{}, {}] is not a proper interval",
                self.min_utility, self.max_utility
            ));
        }
        if self.player_names.len() != self.num_players {
            return invalid("player_names must name every player".into());
        }
        if self.scenario.private_info.len() != self.num_players {
            return invalid("scenario.private_info must cover every player".into());
        }
        let sender = self.player_index(&self.scenario.sender);
        let receiver = self.player_index(&self.scenario.receiver);
        match (sender, receiver) {
            (Some(s), Some(r)) if s != r => Ok(()),
            _ => invalid("scenario sender and receiver must be two distinct players".into()),
        }
    }

    pub fn player_index(&self, name: &str) -> Option<usize> {
        self.player_names.iter().position(|n| n == name)
    }

    /// Index of the player who wrote the opening message.
    pub fn sender_index(&self) -> usize {
        self.player_index(&self.scenario.sender).unwrap_or(0)
    }

    pub fn receiver_index(&self) -> usize {
        self.player_index(&self.scenario.receiver).unwrap_or(1)
    }

    pub fn num_actions(&self) -> usize {
        self.action_labels.len()
    }

    /// Index of the `any` label.
    pub fn any_index(&self) -> usize {
        self.action_labels
            .iter()
            .position(|l| normalize_label(l) == ANY_LABEL)
            .expect("validated config contains `any`")
    }

    pub fn action_index(&self, label: &str) -> Option<usize> {
        let norm = normalize_label(label);
        self.action_labels.iter().position(|l| normalize_label(l) == norm)
    }

    /// Maximum depth of the game tree: a decision and a chance node per reply.
    pub fn max_depth(&self) -> usize {
        2 * self.num_players * self.num_max_replies as usize
    }

    pub fn instruction_template(&self) -> &str {
        self.instruction_template
            .as_deref()
            .unwrap_or_else(|| self.domain_id.default_instruction())
    }

    pub fn utility_range(&self) -> f64 {
        self.max_utility - self.min_utility
    }

    /// Hex SHA-256 of the compact JSON serialization.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

//! Meeting scheduling: available days, day values and the agreed-day reward.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::LazyLock;

use super::{patterns, DomainError, OracleOutcome};
use crate::backends::{OutcomeTag, RewardJudgment};
use crate::game::{DialogueState, GameConfig, InfoValue, PrivateInfo};

pub const DAYS: [&str; 7] = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"];
pub const AVAILABLE_KEY: &str = "available_days";
pub const VALUES_KEY: &str = "day_prefs";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeetingScenario {
    pub available_days: [BTreeSet<String>; 2],
    pub day_values: [BTreeMap<String, f64>; 2],
}

/// Capitalized day name as used in messages.
pub fn display_day(day: &str) -> String {
    let mut chars = day.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

fn day_order(day: &str) -> usize {
    DAYS.iter().position(|d| *d == day).unwrap_or(DAYS.len())
}

impl MeetingScenario {
    pub fn from_config(config: &GameConfig) -> Result<Self, DomainError> {
        let mut available_days: [BTreeSet<String>; 2] = Default::default();
        let mut day_values: [BTreeMap<String, f64>; 2] = Default::default();
        for p in 0..2 {
            let info = &config.scenario.private_info[p];
            match info.get(AVAILABLE_KEY) {
                Some(InfoValue::List(days)) if !days.is_empty() => {
                    available_days[p] = days.iter().map(|d| d.trim().to_lowercase()).collect();
                }
                _ => return Err(DomainError::InvalidScenario(format!("player {p} has no available days"))),
            }
            match info.get(VALUES_KEY) {
                Some(InfoValue::Table(t)) if DAYS.iter().all(|d| t.contains_key(*d)) => {
                    day_values[p] = t.clone();
                }
                _ => return Err(DomainError::InvalidScenario(format!("player {p} lacks values for all days"))),
            }
        }
        Ok(MeetingScenario { available_days, day_values })
    }

    pub fn private_info(&self, player: usize) -> PrivateInfo {
        let mut days: Vec<&String> = self.available_days[player].iter().collect();
        days.sort_by_key(|d| day_order(d));
        [
            (AVAILABLE_KEY.to_string(), InfoValue::List(days.into_iter().cloned().collect())),
            (VALUES_KEY.to_string(), InfoValue::Table(self.day_values[player].clone())),
        ]
        .into()
    }

    pub fn random(rng: &mut impl Rng) -> Self {
        let mut available_days: [BTreeSet<String>; 2] = Default::default();
        let mut day_values: [BTreeMap<String, f64>; 2] = Default::default();
        for p in 0..2 {
            let count = rng.random_range(2..=5);
            let mut days = DAYS.to_vec();
            days.shuffle(rng);
            available_days[p] = days[..count].iter().map(|d| d.to_string()).collect();
            for day in DAYS {
                day_values[p].insert(day.into(), rng.random_range(0..=10) as f64);
            }
        }
        MeetingScenario { available_days, day_values }
    }

    /// Days both players can attend, in week order.
    pub fn common_days(&self) -> Vec<String> {
        let mut days: Vec<String> =
            self.available_days[0].intersection(&self.available_days[1]).cloned().collect();
        days.sort_by_key(|d| day_order(d));
        days
    }

    pub fn random_available_day(&self, player: usize, rng: &mut impl Rng) -> String {
        let days: Vec<&String> = self.available_days[player].iter().collect();
        days.choose(rng).map(|d| d.to_string()).unwrap_or_else(|| DAYS[0].to_string())
    }
}

static DAY: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(monday|tuesday|wednesday|thursday|friday|saturday|sunday)\b").expect("valid regex")
});

fn last_day(text: &str) -> Option<String> {
    DAY.captures_iter(text).last().map(|c| c[1].to_lowercase())
}

/// The day an accepting final message agrees to: the last day it names, otherwise the last
/// day named earlier in the thread.
pub fn agreed_day(transcript: &DialogueState) -> Option<String> {
    let (_, last) = transcript.replies().last()?;
    if !patterns::is_acceptance(last) {
        return None;
    }
    last_day(last).or_else(|| {
        let messages: Vec<&str> = transcript.messages().map(|(_, t)| t).collect();
        messages[..messages.len() - 1].iter().rev().find_map(|t| last_day(t))
    })
}

/// `(values_0[d], values_1[d])` when the thread ends agreeing on a day `d` both can attend,
/// otherwise zero.
pub fn meeting_reward_oracle(scenario: &MeetingScenario, transcript: &DialogueState) -> [f64; 2] {
    match agreed_day(transcript) {
        Some(day) if scenario.available_days.iter().all(|a| a.contains(&day)) => {
            [scenario.day_values[0][&day], scenario.day_values[1][&day]]
        }
        _ => [0.0; 2],
    }
}

pub(crate) fn score_transcript(config: &GameConfig, transcript: &DialogueState) -> OracleOutcome {
    let Ok(scenario) = MeetingScenario::from_config(config) else {
        return OracleOutcome::failure(config.num_players, "scenario lacks meeting fields");
    };
    let tag = patterns::outcome_of(transcript);
    if tag == OutcomeTag::Valid && agreed_day(transcript).is_none() {
        return OracleOutcome::failure(config.num_players, "acceptance without a day");
    }
    let values = meeting_reward_oracle(&scenario, transcript);
    let (tag, rationale) = match tag {
        OutcomeTag::Valid if values == [0.0; 2] && !is_common(&scenario, transcript) => {
            (OutcomeTag::Incomplete, Some("invalid agreement".to_string()))
        }
        other => (other, None),
    };
    OracleOutcome::ok(RewardJudgment { values: values.to_vec(), outcome_tag: tag, rationale })
}

fn is_common(scenario: &MeetingScenario, transcript: &DialogueState) -> bool {
    agreed_day(transcript).is_some_and(|d| scenario.available_days.iter().all(|a| a.contains(&d)))
}

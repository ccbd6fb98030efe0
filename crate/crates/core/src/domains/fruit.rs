//! Fruit trading: endowments, valuations, trade parsing and the basket-difference reward.

use rand::seq::IndexedRandom;
use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::LazyLock;

use super::{patterns, DomainError, OracleOutcome};
use crate::backends::{OutcomeTag, RewardJudgment};
use crate::game::{DialogueState, GameConfig, InfoValue, PrivateInfo};

pub const FRUITS: [&str; 4] = ["apple", "banana", "blueberry", "kiwi"];
pub const ENDOWMENT_KEY: &str = "fruit_endowment";
pub const VALUATION_KEY: &str = "fruit_valuations";

pub type Basket = BTreeMap<String, u32>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FruitScenario {
    pub endowments: [Basket; 2],
    pub valuations: [BTreeMap<String, f64>; 2],
}

impl FruitScenario {
    pub fn from_config(config: &GameConfig) -> Result<Self, DomainError> {
        let read = |player: usize, key: &str| -> Result<BTreeMap<String, f64>, DomainError> {
            match config.scenario.private_info[player].get(key) {
                Some(InfoValue::Table(t)) if FRUITS.iter().all(|f| t.contains_key(*f)) => Ok(t.clone()),
                _ => Err(DomainError::InvalidScenario(format!("player {player} lacks a complete `{key}`"))),
            }
        };
        let mut endowments: [Basket; 2] = Default::default();
        let mut valuations: [BTreeMap<String, f64>; 2] = Default::default();
        for p in 0..2 {
            for (fruit, count) in read(p, ENDOWMENT_KEY)? {
                if count < 0.0 || count.fract() != 0.0 {
                    return Err(DomainError::InvalidScenario(format!("non-integral count for {fruit}")));
                }
                endowments[p].insert(fruit, count as u32);
            }
            valuations[p] = read(p, VALUATION_KEY)?;
            if valuations[p].values().any(|v| *v < 0.0) {
                return Err(DomainError::InvalidScenario("negative fruit valuation".into()));
            }
        }
        Ok(FruitScenario { endowments, valuations })
    }

    pub fn private_info(&self, player: usize) -> PrivateInfo {
        let endowment = self.endowments[player].iter().map(|(k, v)| (k.clone(), *v as f64)).collect();
        [
            (ENDOWMENT_KEY.to_string(), InfoValue::Table(endowment)),
            (VALUATION_KEY.to_string(), InfoValue::Table(self.valuations[player].clone())),
        ]
        .into()
    }

    /// Value of `basket` under `player`'s valuations.
    pub fn value(&self, player: usize, basket: &Basket) -> f64 {
        basket
            .iter()
            .map(|(fruit, n)| *n as f64 * self.valuations[player].get(fruit).copied().unwrap_or(0.0))
            .sum()
    }

    pub fn can_cover(&self, player: usize, basket: &Basket) -> bool {
        basket
            .iter()
            .all(|(fruit, n)| self.endowments[player].get(fruit).copied().unwrap_or(0) >= *n)
    }

    /// Reward bounds: lose the whole basket, or gain the co-player's whole basket.
    pub fn utility_bounds(&self) -> (f64, f64) {
        let lo = (0..2).map(|p| self.value(p, &self.endowments[p])).fold(0.0, f64::max);
        let hi = (0..2).map(|p| self.value(p, &self.endowments[1 - p])).fold(0.0, f64::max);
        (-lo.max(1.0), hi.max(1.0))
    }

    pub fn random(rng: &mut impl Rng) -> Self {
        let mut endowments: [Basket; 2] = Default::default();
        let mut valuations: [BTreeMap<String, f64>; 2] = Default::default();
        for p in 0..2 {
            for fruit in FRUITS {
                endowments[p].insert(fruit.into(), rng.random_range(0..=4));
                valuations[p].insert(fruit.into(), rng.random_range(1..=10) as f64);
            }
        }
        FruitScenario { endowments, valuations }
    }
}

/// The last concrete proposal in a transcript, from its proposer's perspective, and
/// whether the final message accepts or rejects it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TradeParse {
    pub proposer: Option<usize>,
    pub give: Basket,
    pub receive: Basket,
    pub accepted: bool,
    pub rejected: bool,
}

impl TradeParse {
    pub fn has_proposal(&self) -> bool {
        self.proposer.is_some()
    }
}

const COUNT: &str = r"(?:\d+|one|two|three|four|five|six|seven|eight|nine|ten|an?)";
const FRUIT: &str = r"(?:apples?|bananas?|blueberr(?:y|ies)|kiwis?)";

static ITEM: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"(?i)\b({COUNT})\s+({FRUIT})\b")).expect("valid regex"));

static PROPOSAL: LazyLock<Regex> = LazyLock::new(|| {
    let item = format!(r"\b{COUNT}\s+{FRUIT}\b");
    let list = format!(r"{item}(?:\s*(?:,\s*and|,|and)\s*{item})*");
    Regex::new(&format!(r"(?i)({list})\s+for\s+({list})")).expect("valid regex")
});

static NEGATION: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(?:not|can't|cannot|can not|won't|don't|wouldn't|couldn't)\b|n't\b").expect("valid regex")
});

static RECEIVING: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b(?:accept|receive|get|take)\b").expect("valid regex"));

fn count_value(word: &str) -> u32 {
    match word.to_lowercase().as_str() {
        "a" | "an" | "one" => 1,
        "two" => 2,
        "three" => 3,
        "four" => 4,
        "five" => 5,
        "six" => 6,
        "seven" => 7,
        "eight" => 8,
        "nine" => 9,
        "ten" => 10,
        digits => digits.parse().unwrap_or(0),
    }
}

fn singular(word: &str) -> String {
    let w = word.to_lowercase();
    if w.starts_with("blueberr") {
        "blueberry".into()
    } else {
        w.trim_end_matches('s').to_owned()
    }
}

/// Fruit name with the number agreeing: `1 banana`, `2 blueberries`.
pub fn fruit_noun(fruit: &str, count: u32) -> String {
    if count == 1 {
        fruit.to_owned()
    } else if let Some(stem) = fruit.strip_suffix('y') {
        format!("{stem}ies")
    } else {
        format!("{fruit}s")
    }
}

fn parse_list(text: &str) -> Basket {
    let mut basket = Basket::new();
    for caps in ITEM.captures_iter(text) {
        *basket.entry(singular(&caps[2])).or_insert(0) += count_value(&caps[1]);
    }
    basket
}

/// Proposals in one message as (speaker gives, speaker receives), skipping negated ones.
fn proposals_in(text: &str) -> Vec<(Basket, Basket)> {
    let flat = text.replace(['\u{2019}', '\u{2018}'], "'");
    let mut out = Vec::new();
    for caps in PROPOSAL.captures_iter(&flat) {
        let start = caps.get(0).expect("match").start();
        let sentence_start = flat[..start].rfind(['.', '!', '?', '\n']).map(|i| i + 1).unwrap_or(0);
        let lead = &flat[sentence_start..start];
        if NEGATION.is_match(lead) {
            continue;
        }
        let first = parse_list(&caps[1]);
        let second = parse_list(&caps[2]);
        if RECEIVING.is_match(lead) {
            out.push((second, first));
        } else {
            out.push((first, second));
        }
    }
    out
}

/// Total function: unreadable transcripts give no proposal and neither flag.
pub fn parse_trade(transcript: &DialogueState) -> TradeParse {
    let mut parse = TradeParse::default();
    for (author, text) in transcript.messages() {
        if let Some((give, receive)) = proposals_in(text).pop() {
            parse.proposer = Some(author);
            parse.give = give;
            parse.receive = receive;
        }
    }
    if let Some((_, last)) = transcript.replies().last() {
        parse.rejected = patterns::is_rejection(last);
        parse.accepted = !parse.rejected && patterns::is_acceptance(last);
    }
    parse
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FruitOutcome {
    Agreement,
    /// Accepted, but one side cannot cover what it promised.
    InvalidAgreement,
    Rejected,
    NoAgreement,
}

/// Rewards are indexed by player; the proposer gains `value(receive) − value(give)` under its own
/// valuations, the responder the mirror image.
pub fn fruit_reward_oracle(scenario: &FruitScenario, parse: &TradeParse) -> ([f64; 2], FruitOutcome) {
    if parse.rejected {
        return ([0.0; 2], FruitOutcome::Rejected);
    }
    let Some(proposer) = parse.proposer.filter(|_| parse.accepted) else {
        return ([0.0; 2], FruitOutcome::NoAgreement);
    };
    let responder = 1 - proposer;
    if !scenario.can_cover(proposer, &parse.give) || !scenario.can_cover(responder, &parse.receive) {
        return ([0.0; 2], FruitOutcome::InvalidAgreement);
    }
    let mut values = [0.0; 2];
    values[proposer] = scenario.value(proposer, &parse.receive) - scenario.value(proposer, &parse.give);
    values[responder] = scenario.value(responder, &parse.give) - scenario.value(responder, &parse.receive);
    (values, FruitOutcome::Agreement)
}

pub(crate) fn score_transcript(config: &GameConfig, transcript: &DialogueState) -> OracleOutcome {
    let Ok(scenario) = FruitScenario::from_config(config) else {
        return OracleOutcome::failure(config.num_players, "scenario lacks fruit tables");
    };
    let parse = parse_trade(transcript);
    if parse.accepted && !parse.has_proposal() {
        return OracleOutcome::failure(config.num_players, "acceptance without a readable proposal");
    }
    let (values, outcome) = fruit_reward_oracle(&scenario, &parse);
    let (tag, rationale) = match outcome {
        FruitOutcome::Agreement => (OutcomeTag::Valid, None),
        FruitOutcome::InvalidAgreement => (OutcomeTag::Incomplete, Some("invalid agreement".to_string())),
        FruitOutcome::Rejected => (OutcomeTag::Rejected, None),
        FruitOutcome::NoAgreement => (OutcomeTag::Incomplete, None),
    };
    OracleOutcome::ok(RewardJudgment { values: values.to_vec(), outcome_tag: tag, rationale })
}

/// A feasible single-item proposal for `proposer`: some fruit it owns for some fruit the
/// responder owns. `None` when either basket is empty.
pub fn random_feasible_trade(
    scenario: &FruitScenario,
    proposer: usize,
    rng: &mut impl Rng,
) -> Option<((String, u32), (String, u32))> {
    let owned = |p: usize| -> Vec<&str> {
        FRUITS.iter().copied().filter(|f| scenario.endowments[p][*f] > 0).collect()
    };
    let gives = owned(proposer);
    let gets = owned(1 - proposer);
    let pairs: Vec<(&str, &str)> = gives
        .iter()
        .flat_map(|g| gets.iter().filter(move |r| *r != g).map(move |r| (*g, *r)))
        .collect();
    let (give, receive) = *pairs.choose(rng)?;
    let n_give = rng.random_range(1..=scenario.endowments[proposer][give]);
    let n_receive = rng.random_range(1..=scenario.endowments[1 - proposer][receive]);
    Some(((give.to_owned(), n_give), (receive.to_owned(), n_receive)))
}

//! The three dialogue domains: procedural scenario generation, message templates and
//! rule-based reward oracles.

pub mod debate;
pub mod fruit;
pub mod matrix;
pub mod meeting;
pub mod patterns;
pub mod templates;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::assets;
use crate::backends::{OutcomeTag, RewardJudgment};
use crate::game::{DomainId, GameConfig, PrivateInfo, Scenario, ANY_LABEL};

use debate::DebateScenario;
use fruit::{fruit_noun, FruitScenario};
use meeting::{MeetingScenario, DAYS};
use templates::{fruit_params, meeting_params};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DomainError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("missing template parameter `{0}`")]
    MissingParam(String),
    #[error("unknown domain: {0}")]
    UnknownDomain(String),
}

/// A rule oracle's verdict; `parse_failure` marks transcripts the rules could not read,
/// which score zero and are tagged incomplete.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleOutcome {
    pub judgment: RewardJudgment,
    pub parse_failure: bool,
}

impl OracleOutcome {
    pub fn ok(judgment: RewardJudgment) -> Self {
        OracleOutcome { judgment, parse_failure: false }
    }

    pub fn failure(num_players: usize, reason: &str) -> Self {
        let mut judgment = RewardJudgment::zero(num_players, OutcomeTag::Incomplete);
        judgment.rationale = Some(reason.to_owned());
        OracleOutcome { judgment, parse_failure: true }
    }
}

/// Instruction menu per domain; `any` is always last.
pub fn default_action_labels(domain: DomainId) -> Vec<String> {
    let labels: Vec<&str> = match domain {
        DomainId::Fruit => vec!["calm", "assertive", "submissive"],
        DomainId::Meeting => DAYS.to_vec(),
        DomainId::Debate => debate::STYLES.to_vec(),
    };
    labels.into_iter().chain([ANY_LABEL]).map(str::to_owned).collect()
}

pub(crate) fn pick_names(rng: &mut impl Rng) -> (String, String) {
    let names = assets::lines(assets::NAMES);
    let chosen: Vec<&String> = names.choose_multiple(rng, 2).collect();
    (chosen[0].clone(), chosen[1].clone())
}

/// Config skeleton with the domain defaults and an empty scenario between the two players.
pub(crate) fn base_config(domain: DomainId, sender: &str, receiver: &str) -> GameConfig {
    let (min_utility, max_utility) = match domain {
        DomainId::Fruit => (-1.0, 1.0),
        DomainId::Meeting => (0.0, 10.0),
        DomainId::Debate => (0.0, 1.0),
    };
    GameConfig {
        num_players: 2,
        action_labels: default_action_labels(domain),
        num_llm_seeds: 2,
        num_max_replies: 1,
        min_utility,
        max_utility,
        domain_id: domain,
        header_template: domain.default_header().to_owned(),
        instruction_template: None,
        scenario: Scenario {
            opening_message: String::new(),
            sender: sender.to_owned(),
            receiver: receiver.to_owned(),
            private_info: vec![PrivateInfo::new(), PrivateInfo::new()],
        },
        player_names: vec![sender.to_owned(), receiver.to_owned()],
        max_tokens: 256,
    }
}

fn rng_for(domain: DomainId, seed: u64) -> ChaCha8Rng {
    let salt = match domain {
        DomainId::Meeting => 0x6d65_6574,
        DomainId::Fruit => 0x6672_7569,
        DomainId::Debate => 0x6465_6261,
    };
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt)
}

/// A procedurally generated game: names, private information, an opening message from
/// player 0 to player 1 and a utility range covering every oracle outcome.
pub fn generate_config(domain: DomainId, seed: u64) -> Result<GameConfig, DomainError> {
    let mut rng = rng_for(domain, seed);
    let (sender, receiver) = pick_names(&mut rng);
    let mut config = base_config(domain, &sender, &receiver);
    match domain {
        DomainId::Fruit => {
            let scenario = FruitScenario::random(&mut rng);
            let (lo, hi) = scenario.utility_bounds();
            config.min_utility = lo;
            config.max_utility = hi;
            config.scenario.opening_message = match fruit::random_feasible_trade(&scenario, 0, &mut rng) {
                Some(((give, n_give), (get, n_get))) => {
                    let params = fruit_params(&sender, &receiver, (&give, n_give), (&get, n_get));
                    templates::render_outcome_template(domain, OutcomeTag::Incomplete, &params)?.remove(0).1
                }
                None => format!(
                    "Hi {receiver}, would you like to trade some {} with me? Best, {sender}",
                    fruit_noun(fruit::FRUITS[rng.random_range(0..fruit::FRUITS.len())], 2)
                ),
            };
            config.scenario.private_info = vec![scenario.private_info(0), scenario.private_info(1)];
        }
        DomainId::Meeting => {
            let scenario = MeetingScenario::random(&mut rng);
            let day = scenario.random_available_day(0, &mut rng);
            let params = meeting_params(&sender, &receiver, &day);
            config.scenario.opening_message =
                templates::render_outcome_template(domain, OutcomeTag::Incomplete, &params)?.remove(0).1;
            config.scenario.private_info = vec![scenario.private_info(0), scenario.private_info(1)];
        }
        DomainId::Debate => {
            let scenario = DebateScenario::random(&mut rng);
            config.scenario.opening_message = format!(
                "Hi {receiver}, let's debate the statement \"{}\" I will argue {} it. Best, {sender}",
                scenario.topic,
                scenario.sides[0].as_str()
            );
            config.scenario.private_info = vec![scenario.private_info(0), scenario.private_info(1)];
        }
    }
    debug_assert!(config.validate().is_ok());
    Ok(config)
}

pub fn generate_scenario(domain: DomainId, seed: u64) -> Result<Scenario, DomainError> {
    generate_config(domain, seed).map(|c| c.scenario)
}

/// Parses a domain name, reporting unknown names as a domain error.
pub fn parse_domain(name: &str) -> Result<DomainId, DomainError> {
    name.parse().map_err(|_| DomainError::UnknownDomain(name.to_owned()))
}

/// The fruit game used as the running configuration example: Bob opens to Suzy, four tones,
/// two seeds, one reply each.
pub fn example_fruit_config() -> GameConfig {
    let mut config = base_config(DomainId::Fruit, "Bob", "Suzy");
    let scenario = FruitScenario {
        endowments: [
            [("apple", 1), ("banana", 2), ("blueberry", 0), ("kiwi", 3)].map(|(f, n)| (f.to_owned(), n)).into(),
            [("apple", 3), ("banana", 0), ("blueberry", 2), ("kiwi", 1)].map(|(f, n)| (f.to_owned(), n)).into(),
        ],
        valuations: [
            [("apple", 4.0), ("banana", 6.0), ("blueberry", 2.0), ("kiwi", 1.0)].map(|(f, v)| (f.to_owned(), v)).into(),
            [("apple", 1.0), ("banana", 5.0), ("blueberry", 3.0), ("kiwi", 8.0)].map(|(f, v)| (f.to_owned(), v)).into(),
        ],
    };
    let (lo, hi) = scenario.utility_bounds();
    config.min_utility = lo;
    config.max_utility = hi;
    config.scenario.private_info = vec![scenario.private_info(0), scenario.private_info(1)];
    config.scenario.opening_message =
        "Hi Suzy, I would like to trade you\n2 kiwis for 1\napple. Would you like to trade\nwith me? Best, Bob".into();
    config
}

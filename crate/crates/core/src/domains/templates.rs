//! Two-message outcome templates (a proposal and a reply) and random labeled cases built from
//! them, used to measure reward-model error against the rule oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use super::fruit::{self, fruit_noun, FruitScenario};
use super::meeting::{display_day, MeetingScenario};
use super::{pick_names, DomainError};
use crate::assets;
use crate::backends::OutcomeTag;
use crate::game::{render_template, DialogueState, DomainId, GameConfig};

pub type TemplateParams = BTreeMap<String, String>;

fn reply_template(domain: DomainId, outcome: OutcomeTag) -> Result<(&'static str, &'static str), DomainError> {
    match domain {
        DomainId::Fruit => Ok((
            assets::FRUIT_PROPOSAL,
            match outcome {
                OutcomeTag::Valid => assets::FRUIT_VALID,
                OutcomeTag::Rejected => assets::FRUIT_REJECTED,
                OutcomeTag::Incomplete => assets::FRUIT_INCOMPLETE,
            },
        )),
        DomainId::Meeting => Ok((
            assets::MEETING_PROPOSAL,
            match outcome {
                OutcomeTag::Valid => assets::MEETING_VALID,
                OutcomeTag::Rejected => assets::MEETING_REJECTED,
                OutcomeTag::Incomplete => assets::MEETING_INCOMPLETE,
            },
        )),
        DomainId::Debate => Err(DomainError::UnknownDomain("debate has no outcome templates".into())),
    }
}

fn fill(template: &str, params: &TemplateParams) -> Result<String, DomainError> {
    let mut missing = None;
    let out = render_template(template, |name| {
        let value = params.get(name).cloned();
        if value.is_none() && missing.is_none() {
            missing = Some(name.to_owned());
        }
        value
    });
    match (out, missing) {
        (Ok(text), _) => Ok(text),
        (Err(_), Some(name)) => Err(DomainError::MissingParam(name)),
        (Err(e), None) => Err(DomainError::InvalidScenario(e.to_string())),
    }
}

/// `[(sender, proposal), (receiver, reply)]` with player 0 the sender.
pub fn render_outcome_template(
    domain: DomainId,
    outcome: OutcomeTag,
    params: &TemplateParams,
) -> Result<Vec<(usize, String)>, DomainError> {
    let (proposal, reply) = reply_template(domain, outcome)?;
    Ok(vec![(0, fill(proposal, params)?), (1, fill(reply, params)?)])
}

/// Parameters for a fruit proposal in which the sender gives `give` and receives `receive`.
pub fn fruit_params(sender: &str, receiver: &str, give: (&str, u32), receive: (&str, u32)) -> TemplateParams {
    [
        ("sender", sender.to_owned()),
        ("receiver", receiver.to_owned()),
        ("num_give", give.1.to_string()),
        ("fruit_give", fruit_noun(give.0, give.1)),
        ("num_receive", receive.1.to_string()),
        ("fruit_receive", fruit_noun(receive.0, receive.1)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_owned(), v))
    .collect()
}

pub fn meeting_params(sender: &str, receiver: &str, day: &str) -> TemplateParams {
    [("sender", sender.to_owned()), ("receiver", receiver.to_owned()), ("day", display_day(day))]
        .into_iter()
        .map(|(k, v)| (k.to_owned(), v))
        .collect()
}

/// One labeled reward-evaluation case: a game whose opening message is the templated proposal
/// and a finished two-message transcript.
#[derive(Clone, Debug)]
pub struct OutcomeCase {
    pub outcome: OutcomeTag,
    pub params: TemplateParams,
    pub config: GameConfig,
    pub transcript: DialogueState,
}

/// A random case of the given outcome. Valid cases always describe an agreement the
/// scenario allows (a coverable trade, a day both can attend).
pub fn outcome_case(domain: DomainId, outcome: OutcomeTag, seed: u64) -> Result<OutcomeCase, DomainError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6f75_7463_6f6d_6573);
    let (sender, receiver) = pick_names(&mut rng);
    let mut config = super::base_config(domain, &sender, &receiver);
    let params = match domain {
        DomainId::Fruit => loop {
            let scenario = FruitScenario::random(&mut rng);
            if let Some(((give, n_give), (get, n_get))) = fruit::random_feasible_trade(&scenario, 0, &mut rng) {
                let (lo, hi) = scenario.utility_bounds();
                config.min_utility = lo;
                config.max_utility = hi;
                config.scenario.private_info = vec![scenario.private_info(0), scenario.private_info(1)];
                break fruit_params(&sender, &receiver, (&give, n_give), (&get, n_get));
            }
        },
        DomainId::Meeting => loop {
            let scenario = MeetingScenario::random(&mut rng);
            let common = scenario.common_days();
            let day = if outcome == OutcomeTag::Valid {
                if common.is_empty() {
                    continue;
                }
                common[rng.random_range(0..common.len())].clone()
            } else {
                scenario.random_available_day(0, &mut rng)
            };
            config.scenario.private_info = vec![scenario.private_info(0), scenario.private_info(1)];
            break meeting_params(&sender, &receiver, &day);
        },
        DomainId::Debate => return Err(DomainError::UnknownDomain("debate has no outcome templates".into())),
    };
    let messages = render_outcome_template(domain, outcome, &params)?;
    config.scenario.opening_message = messages[0].1.clone();
    let transcript = DialogueState::from_messages(2, &messages);
    Ok(OutcomeCase { outcome, params, config, transcript })
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use std::collections::BTreeMap;
use std::sync::LazyLock;

use super::{hash64, BackendError, Classifier, GenerationRequest, Generator};
use crate::assets;
use crate::game::{normalize_label, DomainId, ANY_LABEL};

static MARKER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\[\[action:([^\]]+)\]\]").expect("valid regex"));

/// The marker the stub embeds into generated text.
pub fn marker(label: &str) -> String {
    format!("[[action:{}]]", label.trim())
}

/// The label of the last marker in `text`, if any.
pub fn extract_marker(text: &str) -> Option<String> {
    MARKER.captures_iter(text).last().map(|c| c[1].trim().to_owned())
}

/// `text` with all markers removed.
pub fn strip_marker(text: &str) -> String {
    MARKER.replace_all(text, "").trim().to_owned()
}

/// Behaviour of the deterministic stub generator.
#[derive(Clone, Debug, PartialEq)]
pub struct StubProfile {
    /// Probability that the embedded marker names the instructed action.
    pub follow_rate: f64,
    pub message_bank: BTreeMap<DomainId, Vec<String>>,
}

impl StubProfile {
    pub fn with_follow_rate(follow_rate: f64) -> Self {
        StubProfile { follow_rate: follow_rate.clamp(0.0, 1.0), ..StubProfile::default() }
    }

    fn bank(&self, domain: DomainId) -> &[String] {
        self.message_bank.get(&domain).map(Vec::as_slice).unwrap_or(&[])
    }
}

impl Default for StubProfile {
    fn default() -> Self {
        let message_bank = [
            (DomainId::Fruit, assets::lines(assets::STUB_BANK_FRUIT)),
            (DomainId::Meeting, assets::lines(assets::STUB_BANK_MEETING)),
            (DomainId::Debate, assets::lines(assets::STUB_BANK_DEBATE)),
        ]
        .into_iter()
        .collect();
        StubProfile { follow_rate: 1.0, message_bank }
    }
}

/// Output is a pure function of `hash64(prompt ‖ seed)` and the profile.
///
/// With probability `follow_rate` the marker names the instructed action, otherwise a uniformly
/// drawn different one. The `any` instruction carries no information, so its marker is drawn
/// uniformly from the concrete labels.
#[derive(Clone, Debug)]
pub struct StubGenerator {
    profile: StubProfile,
}

impl StubGenerator {
    pub fn new(profile: StubProfile) -> Self {
        StubGenerator { profile }
    }

    pub fn profile(&self) -> &StubProfile {
        &self.profile
    }
}

impl Generator for StubGenerator {
    fn generate(&self, request: &GenerationRequest) -> Result<String, BackendError> {
        let h = hash64(&[request.prompt.as_bytes(), &request.seed.to_le_bytes()]);
        let mut rng = ChaCha8Rng::seed_from_u64(h);
        let follow = rng.random::<f64>() < self.profile.follow_rate;

        let Some(steering) = &request.steering else {
            let bank = self.profile.bank(DomainId::Fruit);
            return Ok(bank
                .get(rng.random_range(0..bank.len().max(1)))
                .cloned()
                .unwrap_or_default()
                .replace("{action}", "any"));
        };

        let pool: Vec<&String> = steering
            .labels
            .iter()
            .filter(|l| normalize_label(l) != ANY_LABEL)
            .collect();
        let instructed = normalize_label(&steering.instructed);
        let instructed_label = pool.iter().find(|l| normalize_label(l) == instructed).copied();
        let chosen: Option<&String> = match instructed_label {
            Some(label) if follow => Some(label),
            Some(label) => {
                let others: Vec<&String> =
                    pool.iter().copied().filter(|l| normalize_label(l) != instructed).collect();
                if others.is_empty() {
                    Some(label)
                } else {
                    Some(others[rng.random_range(0..others.len())])
                }
            }
            None if pool.is_empty() => None,
            None => Some(pool[rng.random_range(0..pool.len())]),
        };

        let bank = self.profile.bank(steering.domain);
        let body = if bank.is_empty() {
            String::from("...")
        } else {
            bank[rng.random_range(0..bank.len())].clone()
        };
        let shown = chosen.map(|l| l.trim()).unwrap_or(ANY_LABEL);
        let body = body.replace("{action}", shown);
        Ok(match chosen {
            Some(label) => format!("{body} {}", marker(label)),
            None => body,
        })
    }
}

/// Reads the stub marker: one-hot on the marked label, uniform when absent or unknown.
#[derive(Clone, Copy, Debug, Default)]
pub struct StubClassifier;

impl Classifier for StubClassifier {
    fn classify(&self, message: &str, labels: &[String]) -> Result<Vec<f64>, BackendError> {
        if labels.is_empty() {
            return Err(BackendError::Config("classify needs at least one label".into()));
        }
        let mut out = vec![0.0; labels.len()];
        if let Some(found) = extract_marker(message).map(|m| normalize_label(&m)) {
            if let Some(i) = labels.iter().position(|l| normalize_label(l) == found) {
                out[i] = 1.0;
                return Ok(out);
            }
        }
        Ok(crate::num::uniform(labels.len()))
    }
}

/// Generator whose text depends only on the seed, never on the instruction. Used to embed
/// simultaneous-move matrix games, where messages must not reveal the chosen action.
#[derive(Clone, Copy, Debug, Default)]
pub struct SilentGenerator;

impl Generator for SilentGenerator {
    fn generate(&self, request: &GenerationRequest) -> Result<String, BackendError> {
        Ok(format!("(message #{})", request.seed))
    }
}

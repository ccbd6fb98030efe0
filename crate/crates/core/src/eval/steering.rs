use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{read_csv, write_csv, EvalError};
use crate::backends::{argmax_set, Classifier, GenerationRequest, Generator, Steering};
use crate::domains::{default_action_labels, generate_config};
use crate::game::{format_prompt, normalize_label, DialogueGame, DomainId, ANY_LABEL};

/// Distinct scenarios the steering prompts are drawn from.
const PROMPT_POOL: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelAccuracy {
    pub label: String,
    pub accuracy: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteeringReport {
    pub per_label: Vec<LabelAccuracy>,
    pub overall: f64,
    pub samples: usize,
    pub random_baseline: f64,
}

impl SteeringReport {
    /// `label,accuracy,samples` with a closing `total` row.
    pub fn to_csv(&self) -> String {
        let mut rows = self.per_label.clone();
        rows.push(LabelAccuracy { label: "total".into(), accuracy: self.overall, samples: self.samples });
        write_csv(&["label", "accuracy", "samples"], &rows)
    }
}

pub fn read_steering_csv(text: &str) -> Result<SteeringReport, EvalError> {
    let mut rows: Vec<LabelAccuracy> = read_csv(text, &["label", "accuracy", "samples"])?;
    let total = match rows.pop() {
        Some(r) if r.label == "total" => r,
        _ => return Err(EvalError::Csv("missing total row".into())),
    };
    Ok(SteeringReport {
        random_baseline: 1.0 / rows.len().max(1) as f64,
        per_label: rows,
        overall: total.accuracy,
        samples: total.samples,
    })
}

/// The concrete instructions of a domain (the menu without `any`).
pub fn steering_labels(domain: DomainId) -> Vec<String> {
    default_action_labels(domain).into_iter().filter(|l| normalize_label(l) != ANY_LABEL).collect()
}

/// Instructs the generator with a uniformly drawn label and checks whether the classifier
/// recognizes it (membership in the argmax set counts).
///
/// Prompts are opening replies in a pool of generated scenarios; sample `i` uses generation
/// seed `i`, so no (prompt, seed) pair repeats.
pub fn steering_accuracy(
    generator: &dyn Generator,
    classifier: &dyn Classifier,
    domain: DomainId,
    labels: &[String],
    num_samples: usize,
    rng_seed: u64,
) -> Result<SteeringReport, EvalError> {
    if num_samples == 0 || labels.is_empty() {
        return Err(EvalError::Invalid("steering needs samples and labels".into()));
    }
    // The prompt menu keeps `any`, which every game config requires.
    let mut menu = labels.to_vec();
    if !menu.iter().any(|l| normalize_label(l) == ANY_LABEL) {
        menu.push(ANY_LABEL.to_string());
    }
    let mut pool = Vec::with_capacity(PROMPT_POOL);
    for i in 0..PROMPT_POOL as u64 {
        let mut config = generate_config(domain, rng_seed.wrapping_add(i))?;
        config.action_labels = menu.clone();
        let game = DialogueGame::new(config, Default::default())?;
        let root = game.root();
        let mover = root.next_mover(game.num_players());
        let prompts: Result<Vec<String>, _> =
            (0..labels.len()).map(|a| format_prompt(game.config(), &root, mover, a)).collect();
        pool.push(prompts?);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut hits = vec![0usize; labels.len()];
    let mut counts = vec![0usize; labels.len()];
    for i in 0..num_samples {
        let a = rng.random_range(0..labels.len());
        let mut request = GenerationRequest::new(pool[i % PROMPT_POOL][a].clone(), i as u32);
        request.steering = Some(Steering { domain, instructed: labels[a].clone(), labels: menu.clone() });
        let message = generator.generate(&request)?;
        let probs = classifier.classify(&message, labels)?;
        counts[a] += 1;
        if argmax_set(&probs, 1e-12).contains(&a) {
            hits[a] += 1;
        }
    }
    let per_label = labels
        .iter()
        .enumerate()
        .map(|(a, label)| LabelAccuracy {
            label: label.clone(),
            accuracy: if counts[a] == 0 { 0.0 } else { hits[a] as f64 / counts[a] as f64 },
            samples: counts[a],
        })
        .collect();
    Ok(SteeringReport {
        per_label,
        overall: hits.iter().sum::<usize>() as f64 / num_samples as f64,
        samples: num_samples,
        random_baseline: 1.0 / labels.len() as f64,
    })
}

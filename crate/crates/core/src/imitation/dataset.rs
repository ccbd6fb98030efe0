use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

use super::embed::Embedder;
use super::ImitationError;
use crate::backends::BackendBundle;
use crate::domains::generate_config;
use crate::efg::cfr_solve;
use crate::game::{DialogueGame, DomainId, GameError};

/// One infostate embedding with its CFR average-policy target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImitationExample {
    pub embedding: Vec<f64>,
    pub target: Vec<f64>,
    pub game_seed: u64,
    pub infostate_key: String,
}

/// Solves each listed game with CFR and emits one example per decision infostate.
pub fn build_dataset_for_seeds(
    domain: DomainId,
    game_seeds: &[u64],
    cfr_iterations: usize,
    backends: &BackendBundle,
    embedder: &dyn Embedder,
) -> Result<Vec<ImitationExample>, GameError> {
    let per_game: Result<Vec<Vec<ImitationExample>>, GameError> = game_seeds
        .par_iter()
        .map(|&seed| {
            let config = generate_config(domain, seed).map_err(|e| GameError::ConfigInvalid(e.to_string()))?;
            let game = DialogueGame::new(config, backends.clone())?;
            let (tree, policy) = cfr_solve::<f64>(&game, cfr_iterations)?;
            Ok(tree
                .infosets
                .iter()
                .map(|info| ImitationExample {
                    embedding: embedder.embed(&info.key),
                    target: policy.probs(&info.key).to_vec(),
                    game_seed: seed,
                    infostate_key: info.key.clone(),
                })
                .collect())
        })
        .collect();
    Ok(per_game?.into_iter().flatten().collect())
}

/// Games `first_seed .. first_seed + num_games`.
pub fn build_dataset(
    domain: DomainId,
    num_games: usize,
    first_seed: u64,
    cfr_iterations: usize,
    backends: &BackendBundle,
    embedder: &dyn Embedder,
) -> Result<Vec<ImitationExample>, GameError> {
    let seeds: Vec<u64> = (0..num_games as u64).map(|i| first_seed + i).collect();
    build_dataset_for_seeds(domain, &seeds, cfr_iterations, backends, embedder)
}

/// Splits game seeds into (train, held out), holding out `fraction` of them (at least one when
/// there are two or more games).
pub fn split_games(seeds: &[u64], fraction: f64) -> (Vec<u64>, Vec<u64>) {
    let mut held = ((seeds.len() as f64) * fraction).round() as usize;
    if seeds.len() >= 2 {
        held = held.clamp(1, seeds.len() - 1);
    } else {
        held = 0;
    }
    let cut = seeds.len() - held;
    (seeds[..cut].to_vec(), seeds[cut..].to_vec())
}

pub fn write_jsonl(examples: &[ImitationExample], mut out: impl Write) -> Result<(), ImitationError> {
    for e in examples {
        serde_json::to_writer(&mut out, e).map_err(|e| ImitationError::Io(e.to_string()))?;
        out.write_all(b"\n").map_err(|e| ImitationError::Io(e.to_string()))?;
    }
    Ok(())
}

pub fn read_jsonl(input: impl BufRead) -> Result<Vec<ImitationExample>, ImitationError> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line.map_err(|e| ImitationError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| ImitationError::Io(e.to_string()))?);
    }
    Ok(out)
}

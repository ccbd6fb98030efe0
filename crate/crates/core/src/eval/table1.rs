use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{read_csv, write_csv, EvalError};
use crate::backends::BackendBundle;
use crate::domains::generate_config;
use crate::efg::{baseline_policy, cfr_gain, cfr_solve, ess_indicator, nash_conv};
use crate::game::{normalize_label, CallStats, DialogueGame, DomainId, ANY_LABEL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub domain: String,
    pub nashconv: f64,
    pub cfr_gain: f64,
    pub ess: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRow {
    pub domain: String,
    pub game_seed: u64,
    pub nashconv: f64,
    pub cfr_gain: f64,
    pub ess: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table1Report {
    pub games: Vec<GameRow>,
    pub average: Table1Row,
    /// Backend calls actually issued, summed over games.
    pub calls: CallStats,
    /// Distinct memoized transitions, summed over games.
    pub distinct: CallStats,
}

impl Table1Report {
    /// `domain,nashconv,cfr_gain,ess` for the domain average.
    pub fn to_csv(&self) -> String {
        Self::csv(std::slice::from_ref(&self.average))
    }

    /// Averages of several domains in one table.
    pub fn csv(rows: &[Table1Row]) -> String {
        write_csv(&["domain", "nashconv", "cfr_gain", "ess"], rows)
    }

    /// Per-game rows, `domain,game_seed,nashconv,cfr_gain,ess`.
    pub fn games_csv(&self) -> String {
        write_csv(&["domain", "game_seed", "nashconv", "cfr_gain", "ess"], &self.games)
    }
}

pub fn read_table1_csv(text: &str) -> Result<Vec<Table1Row>, EvalError> {
    read_csv(text, &["domain", "nashconv", "cfr_gain", "ess"])
}

/// Solves games `first_seed ..` of a domain with CFR and scores the average policy against the
/// always-`any` baseline. Expectations are exact: every tree is enumerated.
pub fn run_table1_protocol(
    domain: DomainId,
    num_games: usize,
    first_seed: u64,
    cfr_iterations: usize,
    backends: &BackendBundle,
) -> Result<Table1Report, EvalError> {
    if num_games == 0 {
        return Err(EvalError::Invalid("table 1 needs at least one game".into()));
    }
    let results: Result<Vec<(GameRow, CallStats, CallStats)>, EvalError> = (0..num_games as u64)
        .into_par_iter()
        .map(|i| {
            let seed = first_seed + i;
            let config = generate_config(domain, seed)?;
            let any = config
                .action_labels
                .iter()
                .position(|l| normalize_label(l) == ANY_LABEL)
                .ok_or_else(|| EvalError::Invalid("the action menu has no `any` baseline".into()))?;
            let game = DialogueGame::new(config, backends.clone())?;
            let (tree, policy) = cfr_solve::<f64>(&game, cfr_iterations)?;
            let baseline = baseline_policy(tree.num_actions, any);
            let nc = nash_conv(&tree, &policy);
            let gain = cfr_gain(&tree, &policy, &baseline);
            let row = GameRow {
                domain: domain.as_str().to_string(),
                game_seed: seed,
                nashconv: nc,
                cfr_gain: gain,
                ess: ess_indicator(nc, gain),
            };
            Ok((row, game.stats(), game.distinct_transitions()))
        })
        .collect();
    let results = results?;
    let n = results.len() as f64;
    let nashconv = results.iter().map(|r| r.0.nashconv).sum::<f64>() / n;
    let gain = results.iter().map(|r| r.0.cfr_gain).sum::<f64>() / n;
    let add = |a: CallStats, b: CallStats| CallStats {
        generate: a.generate + b.generate,
        terminate: a.terminate + b.terminate,
        reward: a.reward + b.reward,
    };
    let calls = results.iter().fold(CallStats::default(), |acc, r| add(acc, r.1));
    let distinct = results.iter().fold(CallStats::default(), |acc, r| add(acc, r.2));
    Ok(Table1Report {
        games: results.into_iter().map(|r| r.0).collect(),
        average: Table1Row {
            domain: domain.as_str().to_string(),
            nashconv,
            cfr_gain: gain,
            ess: ess_indicator(nashconv, gain),
        },
        calls,
        distinct,
    })
}

use serde::{Deserialize, Serialize};

use super::{read_csv, write_csv, EvalError};
use crate::backends::{OutcomeTag, RewardModel};
use crate::domains::templates::outcome_case;
use crate::game::DomainId;

/// Magnitudes at or below this count as zero when comparing signs.
pub const SIGN_TOLERANCE: f64 = 1e-9;

/// -1, 0 or +1.
pub fn sign_bucket(x: f64) -> i8 {
    if x.abs() <= SIGN_TOLERANCE {
        0
    } else if x > 0.0 {
        1
    } else {
        -1
    }
}

/// Error statistics of one outcome type, or of all of them (`outcome == "all"`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeError {
    pub outcome: String,
    pub norm: f64,
    pub sgn: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RewardErrorReport {
    pub rows: Vec<OutcomeError>,
}

impl RewardErrorReport {
    /// Pools several single-outcome reports and appends the `all` row.
    pub fn combine(parts: &[RewardErrorReport]) -> RewardErrorReport {
        let mut rows: Vec<OutcomeError> =
            parts.iter().flat_map(|p| p.rows.iter().filter(|r| r.outcome != "all").cloned()).collect();
        let samples: usize = rows.iter().map(|r| r.samples).sum();
        if samples > 0 {
            let weighted = |f: fn(&OutcomeError) -> f64| {
                rows.iter().map(|r| f(r) * r.samples as f64).sum::<f64>() / samples as f64
            };
            let all = OutcomeError { outcome: "all".into(), norm: weighted(|r| r.norm), sgn: weighted(|r| r.sgn), samples };
            rows.push(all);
        }
        RewardErrorReport { rows }
    }

    pub fn row(&self, outcome: &str) -> Option<&OutcomeError> {
        self.rows.iter().find(|r| r.outcome == outcome)
    }

    /// `outcome,norm,sgn,samples`.
    pub fn to_csv(&self) -> String {
        write_csv(&["outcome", "norm", "sgn", "samples"], &self.rows)
    }
}

pub fn read_reward_csv(text: &str) -> Result<RewardErrorReport, EvalError> {
    Ok(RewardErrorReport { rows: read_csv(text, &["outcome", "norm", "sgn", "samples"])? })
}

/// Scores `num_scenarios` templated dialogues of one outcome with both models.
///
/// Every scenario contributes one sample per player. Norm is the mean absolute error over the
/// scenario's utility range; Sgn is the share of samples whose sign bucket differs.
pub fn reward_error(
    model: &dyn RewardModel,
    oracle: &dyn RewardModel,
    domain: DomainId,
    outcome: OutcomeTag,
    num_scenarios: usize,
    rng_seed: u64,
) -> Result<RewardErrorReport, EvalError> {
    if num_scenarios == 0 {
        return Err(EvalError::Invalid("reward evaluation needs at least one scenario".into()));
    }
    let mut norm_sum = 0.0;
    let mut sign_misses = 0usize;
    let mut samples = 0usize;
    for i in 0..num_scenarios as u64 {
        let case = outcome_case(domain, outcome, rng_seed.wrapping_mul(1_000_003).wrapping_add(i))?;
        let truth = oracle.score(&case.config, &case.transcript)?;
        let guess = model.score(&case.config, &case.transcript)?;
        let range = case.config.max_utility - case.config.min_utility;
        for p in 0..case.config.num_players {
            let r = truth.values.get(p).copied().unwrap_or(0.0);
            let r_hat = guess.values.get(p).copied().unwrap_or(0.0);
            norm_sum += (r_hat - r).abs() / range;
            if sign_bucket(r_hat) != sign_bucket(r) {
                sign_misses += 1;
            }
            samples += 1;
        }
    }
    let row = OutcomeError {
        outcome: outcome.as_str().to_string(),
        norm: norm_sum / samples as f64,
        sgn: sign_misses as f64 / samples as f64,
        samples,
    };
    Ok(RewardErrorReport { rows: vec![row] })
}

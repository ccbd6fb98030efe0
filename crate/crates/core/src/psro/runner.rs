use serde::{Deserialize, Serialize};

use super::operators::{br_better, br_categorical, br_shotgun, br_trajectory};
use super::proposer::Proposer;
use super::rollout::{GameFamily, PayoffEstimator};
use super::{BrOperator, Candidate, CandidateSet, PsroConfig, PsroError};
use crate::backends::BackendBundle;
use crate::nfg::{JointDistribution, PayoffTensor};

/// State of the loop after one solve: the candidate sets, their payoff tensor and the
/// meta-strategy over it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsroIteration {
    pub iteration: usize,
    pub labels: Vec<Vec<String>>,
    /// `row,col,u1,u2` CSV of the tensor.
    pub tensor: String,
    pub meta_strategy: JointDistribution<f64>,
    pub marginals: Vec<Vec<f64>>,
    /// Score of each current label against the co-player marginal.
    pub scores: Vec<Vec<f64>>,
    /// Labels appended right before this solve (empty for the initial solve).
    pub new_candidates: Vec<Candidate>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Every best response was already in its player's set.
    NoNewCandidates { iteration: usize },
    MaxIterations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsroTrace {
    pub iterations: Vec<PsroIteration>,
    pub stop: StopReason,
    pub final_set: CandidateSet,
}

impl PsroTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

fn snapshot(
    iteration: usize,
    set: &CandidateSet,
    tensor: &PayoffTensor<f64>,
    joint: JointDistribution<f64>,
    new_candidates: Vec<Candidate>,
) -> PsroIteration {
    let (x, y) = joint.marginals();
    let scores = vec![tensor.action_values(0, &y), tensor.action_values(1, &x)];
    PsroIteration {
        iteration,
        labels: vec![set.labels(0), set.labels(1)],
        tensor: tensor.to_csv(),
        meta_strategy: joint,
        marginals: vec![x, y],
        scores,
        new_candidates,
    }
}

/// Score of `label` for `player` against the co-player marginal `opponent` over `labels`.
fn mixture_score(
    estimator: &PayoffEstimator,
    player: usize,
    label: &str,
    labels: &[String],
    opponent: &[f64],
) -> Result<f64, PsroError> {
    let mut total = 0.0;
    for (other, &mass) in labels.iter().zip(opponent) {
        if mass <= 0.0 {
            continue;
        }
        let cell = if player == 0 { estimator.cell(label, other)? } else { estimator.cell(other, label)? };
        total += mass * cell[player];
    }
    Ok(total)
}

/// The PSRO loop: solve the meta-game over the current sets, add each player's approximate best
/// response, and stop once no response is new or after `max_outer_iterations` rounds.
///
/// A proposer that cannot produce a novel label makes that player's response its best existing
/// label, which counts as "not new".
pub fn psro_loop(
    config: &PsroConfig,
    family: &GameFamily,
    backends: &BackendBundle,
    proposer: &mut dyn Proposer,
) -> Result<PsroTrace, PsroError> {
    config.validate()?;
    let estimator = PayoffEstimator::new(family.clone(), backends.clone(), config.rollouts_per_cell, config.run_seed);
    let initial: Vec<&str> = config.initial_labels.iter().map(String::as_str).collect();
    let mut set = CandidateSet::new(&initial, 2)?;

    let mut tensor = estimator.tensor(&set.labels(0), &set.labels(1))?;
    let mut joint = config.meta_solver.solve(&tensor, &config.meta_params)?;
    let mut iterations = vec![snapshot(0, &set, &tensor, joint.clone(), Vec::new())];

    for t in 1..=config.max_outer_iterations {
        let last = iterations.last().expect("initial snapshot");
        for p in 0..2 {
            for (c, s) in set.players[p].iter_mut().zip(&last.scores[p]) {
                c.score = Some(*s);
            }
        }
        let value = tensor.expected_payoffs(&joint)?;
        let responders: Vec<usize> = if config.symmetric { vec![0] } else { vec![0, 1] };
        let mut added = Vec::new();
        for &p in &responders {
            let labels_other = set.labels(1 - p);
            let opponent = last.marginals[1 - p].clone();
            let mut evaluator =
                |player: usize, label: &str| mixture_score(&estimator, player, label, &labels_other, &opponent);
            let current = set.players[p].clone();
            let response = match config.br_operator {
                BrOperator::Shotgun => br_shotgun(p, &current, config.k, proposer, &mut evaluator),
                BrOperator::Trajectory => br_trajectory(p, &current, config.k, proposer, &mut evaluator),
                BrOperator::Better => {
                    br_better(p, &current, value[p], proposer, &mut evaluator, config.max_attempts)
                        .map(|r| if r.improved { r.candidate } else { best_existing(&current) })
                }
                BrOperator::Categorical => {
                    br_categorical(p, &current, config.k, config.k_prime, proposer, &mut evaluator)
                        .map(|r| r.best_label)
                }
            };
            let candidate = match response {
                Ok(c) => c,
                Err(PsroError::ProposerExhausted { .. }) => best_existing(&current),
                Err(e) => return Err(e),
            };
            let targets: Vec<usize> = if config.symmetric { vec![0, 1] } else { vec![p] };
            let mut is_new = false;
            for q in targets {
                is_new |= set.push(q, &candidate.label);
            }
            if is_new {
                added.push(candidate);
            }
        }
        if added.is_empty() {
            return Ok(PsroTrace { iterations, stop: StopReason::NoNewCandidates { iteration: t }, final_set: set });
        }
        tensor = estimator.tensor(&set.labels(0), &set.labels(1))?;
        joint = config.meta_solver.solve(&tensor, &config.meta_params)?;
        iterations.push(snapshot(t, &set, &tensor, joint.clone(), added));
    }
    Ok(PsroTrace { iterations, stop: StopReason::MaxIterations, final_set: set })
}

fn best_existing(current: &[Candidate]) -> Candidate {
    let mut best = current[0].clone();
    for c in &current[1..] {
        if c.score.unwrap_or(f64::NEG_INFINITY) > best.score.unwrap_or(f64::NEG_INFINITY) {
            best = c.clone();
        }
    }
    best
}

/// Per-iteration equilibrium mass of every label: `iteration,player,label,mass`.
pub fn marginals_csv(trace: &PsroTrace) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(["iteration", "player", "label", "mass"]).expect("in-memory write");
    for it in &trace.iterations {
        for (p, (labels, masses)) in it.labels.iter().zip(&it.marginals).enumerate() {
            for (label, mass) in labels.iter().zip(masses) {
                w.write_record([it.iteration.to_string(), p.to_string(), label.clone(), mass.to_string()])
                    .expect("in-memory write");
            }
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

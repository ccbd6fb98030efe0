//! Normal-form meta-solvers: regret matching to a coarse-correlated equilibrium, replicator
//! dynamics and the Nash bargaining solution.

mod bargaining;
mod regret_matching;
mod replicator;
mod tensor;

pub use bargaining::{nash_bargaining, project_simplex, BargainingConfig, BargainingSolution, DISAGREEMENT_OFFSET};
pub use regret_matching::regret_matching_cce;
pub use replicator::{replicator_dynamics, replicator_step, ReplicatorResult};
pub use tensor::{JointDistribution, PayoffTensor};

use serde::{Deserialize, Serialize};
use std::str::FromStr;
use thiserror::Error;

use crate::num::Scalar;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NfgError {
    #[error("shape mismatch: expected {expected} cells, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("invalid tensor: {0}")]
    InvalidTensor(String),
    #[error("replicator dynamics diverged: {0}")]
    Divergence(String),
    #[error("tensor io: {0}")]
    Io(String),
}

/// Which meta-solver turns a payoff tensor into a joint distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MetaSolver {
    RegretMatching,
    #[default]
    Replicator,
    NashBargaining,
}

/// Budgets for the meta-solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetaSolverParams {
    pub rm_iterations: usize,
    pub replicator_steps: usize,
    pub replicator_step_size: f64,
    pub bargaining: BargainingConfig,
}

impl Default for MetaSolverParams {
    fn default() -> Self {
        MetaSolverParams {
            rm_iterations: 10_000,
            replicator_steps: 10_000,
            replicator_step_size: 0.01,
            bargaining: BargainingConfig::default(),
        }
    }
}

impl MetaSolver {
    /// Replicator output is the product of the time-averaged marginals.
    pub fn solve<T: Scalar>(
        self,
        tensor: &PayoffTensor<T>,
        params: &MetaSolverParams,
    ) -> Result<JointDistribution<T>, NfgError> {
        match self {
            MetaSolver::RegretMatching => Ok(regret_matching_cce(tensor, params.rm_iterations)),
            MetaSolver::Replicator => {
                let r = replicator_dynamics(tensor, params.replicator_steps, T::of(params.replicator_step_size))?;
                Ok(JointDistribution::product(&r.average.0, &r.average.1))
            }
            MetaSolver::NashBargaining => Ok(nash_bargaining(tensor, None, params.bargaining).joint),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MetaSolver::RegretMatching => "regret_matching",
            MetaSolver::Replicator => "replicator",
            MetaSolver::NashBargaining => "nash_bargaining",
        }
    }
}

impl FromStr for MetaSolver {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().replace('-', "_").as_str() {
            "regret_matching" | "rm" | "cce" => Ok(MetaSolver::RegretMatching),
            "replicator" | "replicator_dynamics" => Ok(MetaSolver::Replicator),
            "nash_bargaining" | "nb" => Ok(MetaSolver::NashBargaining),
            other => Err(format!("unknown meta-solver `{other}`")),
        }
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mlp::MlpPolicy;
use super::ImitationError;
use crate::num::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub rng_seed: u64,
    /// Loss is recorded every `log_every` steps.
    pub log_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            steps: 10_000,
            batch_size: 128,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            rng_seed: 0,
            log_every: 100,
        }
    }
}

/// Adam with bias correction.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    m: Vec<T>,
    v: Vec<T>,
    t: i32,
    lr: T,
    b1: T,
    b2: T,
    eps: T,
}

impl<T: Scalar> Adam<T> {
    pub fn new(num_params: usize, config: &TrainConfig) -> Self {
        Adam {
            m: vec![T::zero(); num_params],
            v: vec![T::zero(); num_params],
            t: 0,
            lr: T::of(config.learning_rate),
            b1: T::of(config.adam_beta1),
            b2: T::of(config.adam_beta2),
            eps: T::of(config.adam_eps),
        }
    }

    pub fn step(&mut self, params: &mut [T], grad: &[T]) {
        self.t += 1;
        let c1 = T::one() - self.b1.powi(self.t);
        let c2 = T::one() - self.b2.powi(self.t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.b1 * self.m[i] + (T::one() - self.b1) * g;
            self.v[i] = self.b2 * self.v[i] + (T::one() - self.b2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Loss recorded at a training step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossPoint {
    pub step: usize,
    pub loss: f64,
}

/// Trains on `(embedding, target)` pairs with minibatches drawn uniformly with replacement.
///
/// Each batch is folded into its distinct examples weighted by multiplicity, which gives the
/// same loss and gradient as the plain mean over the batch.
pub fn train<T: Scalar>(
    policy: &mut MlpPolicy<T>,
    data: &[(Vec<T>, Vec<T>)],
    config: &TrainConfig,
) -> Result<Vec<LossPoint>, ImitationError> {
    if data.is_empty() {
        return Err(ImitationError::EmptyBatch);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut adam = Adam::new(policy.params.len(), config);
    let mut curve = Vec::new();
    let batch_size = config.batch_size.max(1);
    let scale = T::one() / T::of(batch_size as f64);
    let mut picks = vec![0usize; batch_size];
    for step in 1..=config.steps {
        for p in picks.iter_mut() {
            *p = rng.random_range(0..data.len());
        }
        let mut sorted = picks.clone();
        sorted.sort_unstable();
        let mut batch: Vec<(&[T], &[T], T)> = Vec::new();
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j < sorted.len() && sorted[j] == sorted[i] {
                j += 1;
            }
            let (x, t) = &data[sorted[i]];
            batch.push((x, t, scale * T::of((j - i) as f64)));
            i = j;
        }
        let (loss, grad) = policy.loss_and_grad(&batch)?;
        if !loss.is_finite() {
            return Err(ImitationError::NonFiniteLoss { step, curve });
        }
        if step % config.log_every.max(1) == 0 || step == 1 {
            curve.push(LossPoint { step, loss: loss.to_f64_lossy() });
        }
        adam.step(&mut policy.params, &grad);
    }
    Ok(curve)
}

/// `step,loss` CSV of a loss curve.
pub fn loss_curve_csv(curve: &[LossPoint]) -> String {
    let mut out = String::from("step,loss\n");
    for p in curve {
        out.push_str(&format!("{},{}\n", p.step, p.loss));
    }
    out
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ImitationError;
use crate::num::Scalar;

pub const HIDDEN: usize = 256;
/// Arguments of the logarithm in the loss are clamped from below at this value.
pub const LOG_FLOOR: f64 = 1e-12;

/// Feed-forward policy `D → H → H → |A|` with rectifier hidden layers and a softmax output.
/// Parameters live in one flat vector: per layer the weights (row-major, `out × in`) then
/// the biases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpPolicy<T> {
    pub sizes: Vec<usize>,
    pub params: Vec<T>,
}

/// Activations kept for the backward pass.
struct Trace<T> {
    /// Layer inputs, one per layer.
    inputs: Vec<Vec<T>>,
    /// Pre-activations of the hidden layers.
    pre: Vec<Vec<T>>,
    probs: Vec<T>,
}

impl<T: Scalar> MlpPolicy<T> {
    /// He-uniform weights, zero biases.
    pub fn new(input: usize, hidden: usize, actions: usize, seed: u64) -> Self {
        let sizes = vec![input, hidden, hidden, actions];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::with_capacity(Self::count(&sizes));
        for l in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let bound = (6.0 / fan_in as f64).sqrt();
            params.extend((0..fan_in * fan_out).map(|_| T::of(rng.random_range(-bound..bound))));
            params.extend((0..fan_out).map(|_| T::zero()));
        }
        MlpPolicy { sizes, params }
    }

    pub fn with_default_hidden(input: usize, actions: usize, seed: u64) -> Self {
        Self::new(input, HIDDEN, actions, seed)
    }

    pub fn zeros(input: usize, hidden: usize, actions: usize) -> Self {
        let sizes = vec![input, hidden, hidden, actions];
        let n = Self::count(&sizes);
        MlpPolicy { sizes, params: vec![T::zero(); n] }
    }

    fn count(sizes: &[usize]) -> usize {
        sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn num_actions(&self) -> usize {
        *self.sizes.last().expect("layers")
    }

    /// Offsets of layer `l`'s weights and biases.
    fn offsets(&self, l: usize) -> (usize, usize) {
        let start: usize = self.sizes.windows(2).take(l).map(|w| w[0] * w[1] + w[1]).sum();
        (start, start + self.sizes[l] * self.sizes[l + 1])
    }

    /// Index of output-layer bias `a` in the flat parameter vector.
    pub fn output_bias_index(&self, a: usize) -> usize {
        self.offsets(self.sizes.len() - 2).1 + a
    }

    fn check(&self, x: &[T]) -> Result<(), ImitationError> {
        if x.len() != self.input_dim() {
            return Err(ImitationError::ShapeMismatch { expected: self.input_dim(), found: x.len() });
        }
        Ok(())
    }

    fn run(&self, x: &[T]) -> Trace<T> {
        let layers = self.sizes.len() - 1;
        let mut inputs = Vec::with_capacity(layers);
        let mut pre = Vec::with_capacity(layers - 1);
        let mut h = x.to_vec();
        for l in 0..layers {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let (w, b) = self.offsets(l);
            let mut z = self.params[b..b + n_out].to_vec();
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &self.params[w + o * n_in..w + (o + 1) * n_in];
                *zo += row.iter().zip(&h).map(|(a, b)| *a * *b).sum::<T>();
            }
            inputs.push(h);
            if l + 1 < layers {
                h = z.iter().map(|v| v.max(T::zero())).collect();
                pre.push(z);
            } else {
                h = softmax(&z);
            }
        }
        Trace { inputs, pre, probs: h }
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>, ImitationError> {
        self.check(x)?;
        Ok(self.run(x).probs)
    }

    /// Weighted soft-target cross-entropy `Σ_i w_i · (−Σ_a t_ia log p_ia)` over the batch,
    /// with its gradient. Weights should sum to one for a mean.
    pub fn loss_and_grad(&self, batch: &[(&[T], &[T], T)]) -> Result<(T, Vec<T>), ImitationError> {
        if batch.is_empty() {
            return Err(ImitationError::EmptyBatch);
        }
        let floor = T::of(LOG_FLOOR);
        let mut grad = vec![T::zero(); self.params.len()];
        let mut loss = T::zero();
        let layers = self.sizes.len() - 1;
        for &(x, target, weight) in batch {
            self.check(x)?;
            if target.len() != self.num_actions() {
                return Err(ImitationError::ShapeMismatch { expected: self.num_actions(), found: target.len() });
            }
            let trace = self.run(x);
            let p = &trace.probs;
            // Terms whose probability is clamped contribute a constant, hence no gradient.
            let mut live_mass = T::zero();
            for (pa, ta) in p.iter().zip(target) {
                loss -= weight * *ta * pa.max(floor).ln();
                if *pa > floor {
                    live_mass += *ta;
                }
            }
            let mut delta: Vec<T> = p
                .iter()
                .zip(target)
                .map(|(pa, ta)| {
                    let t_live = if *pa > floor { *ta } else { T::zero() };
                    weight * (*pa * live_mass - t_live)
                })
                .collect();
            for l in (0..layers).rev() {
                let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
                let (w, b) = self.offsets(l);
                let input = &trace.inputs[l];
                for o in 0..n_out {
                    let d = delta[o];
                    grad[b + o] += d;
                    if d != T::zero() {
                        let g = &mut grad[w + o * n_in..w + (o + 1) * n_in];
                        for (gi, xi) in g.iter_mut().zip(input) {
                            *gi += d * *xi;
                        }
                    }
                }
                if l == 0 {
                    break;
                }
                let mut back = vec![T::zero(); n_in];
                for o in 0..n_out {
                    let d = delta[o];
                    if d == T::zero() {
                        continue;
                    }
                    let row = &self.params[w + o * n_in..w + (o + 1) * n_in];
                    for (bi, wi) in back.iter_mut().zip(row) {
                        *bi += d * *wi;
                    }
                }
                let z = &trace.pre[l - 1];
                delta = back.into_iter().zip(z).map(|(g, zi)| if *zi > T::zero() { g } else { T::zero() }).collect();
            }
        }
        Ok((loss, grad))
    }

    /// Mean cross-entropy over a batch of `(embedding, target)` pairs, with its gradient.
    pub fn ce_loss_and_grad(&self, batch: &[(&[T], &[T])]) -> Result<(T, Vec<T>), ImitationError> {
        let w = T::one() / T::of(batch.len().max(1) as f64);
        let weighted: Vec<(&[T], &[T], T)> = batch.iter().map(|(x, t)| (*x, *t, w)).collect();
        self.loss_and_grad(&weighted)
    }

    pub fn to_json(&self) -> String {
        let params: Vec<f64> = self.params.iter().map(|p| p.to_f64_lossy()).collect();
        serde_json::json!({ "sizes": self.sizes, "params": params }).to_string()
    }

    pub fn from_json(text: &str) -> Result<Self, ImitationError> {
        #[derive(Deserialize)]
        struct Raw {
            sizes: Vec<usize>,
            params: Vec<f64>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| ImitationError::Io(e.to_string()))?;
        if raw.sizes.len() < 2 || Self::count(&raw.sizes) != raw.params.len() {
            return Err(ImitationError::Io("parameter count does not match the shape header".into()));
        }
        Ok(MlpPolicy { sizes: raw.sizes, params: raw.params.into_iter().map(T::of).collect() })
    }
}

pub fn softmax<T: Scalar>(z: &[T]) -> Vec<T> {
    let max = z.iter().copied().fold(T::neg_infinity(), T::max);
    let mut e: Vec<T> = z.iter().map(|v| (*v - max).exp()).collect();
    let total: T = e.iter().copied().sum();
    e.iter_mut().for_each(|v| *v /= total);
    e
}

/// Shannon entropy in nats.
pub fn entropy<T: Scalar>(p: &[T]) -> T {
    p.iter().filter(|x| **x > T::zero()).map(|x| -*x * x.ln()).sum()
}

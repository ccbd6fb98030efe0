use super::tensor::{JointDistribution, PayoffTensor};
use crate::num::{regret_matching, Scalar};

/// Simultaneous regret matching for both players; returns the empirical joint distribution
/// of play, i.e. the average of the outer products of the current strategies.
pub fn regret_matching_cce<T: Scalar>(tensor: &PayoffTensor<T>, iterations: usize) -> JointDistribution<T> {
    let (n, m) = (tensor.rows(), tensor.cols());
    let mut regrets = [vec![T::zero(); n], vec![T::zero(); m]];
    let mut x = vec![T::zero(); n];
    let mut y = vec![T::zero(); m];
    let mut sum = vec![T::zero(); n * m];
    let iterations = iterations.max(1);
    for _ in 0..iterations {
        regret_matching(&regrets[0], &mut x);
        regret_matching(&regrets[1], &mut y);
        for r in 0..n {
            for c in 0..m {
                sum[r * m + c] += x[r] * y[c];
            }
        }
        for (player, own, other) in [(0, &x, &y), (1, &y, &x)] {
            let values = tensor.action_values(player, other);
            let current: T = values.iter().zip(own.iter()).map(|(v, p)| *v * *p).sum();
            for (reg, v) in regrets[player].iter_mut().zip(&values) {
                *reg += *v - current;
            }
        }
    }
    let scale = T::one() / T::of(iterations as f64);
    JointDistribution { rows: n, cols: m, weights: sum.into_iter().map(|w| w * scale).collect() }
}

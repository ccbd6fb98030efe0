use super::best_response::{best_response_value, expected_values, expected_values_profile};
use super::policy::TabularPolicy;
use super::tree::GameTree;
use crate::num::Scalar;

/// Sum over players of the best-deviation gain against `policy`.
pub fn nash_conv<T: Scalar>(tree: &GameTree<T>, policy: &TabularPolicy<T>) -> T {
    let values = expected_values(tree, policy);
    (0..tree.num_players)
        .map(|p| best_response_value(tree, policy, p) - values[p])
        .sum()
}

/// Per-player gain from switching to `candidate` while everyone else keeps `baseline`.
pub fn cfr_gain_per_player<T: Scalar>(
    tree: &GameTree<T>,
    candidate: &TabularPolicy<T>,
    baseline: &TabularPolicy<T>,
) -> Vec<T> {
    let base = expected_values(tree, baseline);
    (0..tree.num_players)
        .map(|p| {
            let mut profile = vec![baseline; tree.num_players];
            profile[p] = candidate;
            expected_values_profile(tree, &profile)[p] - base[p]
        })
        .collect()
}

/// Mean over players of [`cfr_gain_per_player`].
pub fn cfr_gain<T: Scalar>(tree: &GameTree<T>, candidate: &TabularPolicy<T>, baseline: &TabularPolicy<T>) -> T {
    let gains = cfr_gain_per_player(tree, candidate, baseline);
    let n = T::of(gains.len() as f64);
    gains.into_iter().sum::<T>() / n
}

/// The evolutionary-stability proxy: switching gains strictly more than any deviation could.
pub fn ess_indicator<T: Scalar>(nash_conv_value: T, cfr_gain_value: T) -> bool {
    cfr_gain_value > nash_conv_value
}

/// The uninformative baseline: always the `any` instruction.
pub fn baseline_policy<T: Scalar>(num_actions: usize, any_index: usize) -> TabularPolicy<T> {
    TabularPolicy::pure(num_actions, any_index)
}

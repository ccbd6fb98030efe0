mod common;

use approx::assert_abs_diff_eq;
use chatgames::backends::{BackendBundle, BackendError, PayoffTableReward, StubProfile, TerminationJudge};
use chatgames::domains::example_fruit_config;
use chatgames::domains::matrix::{
    effective_play, matching_pennies, matrix_config, matrix_game, rock_paper_scissors, AnyEmbedding,
};
use chatgames::efg::{
    baseline_policy, best_response, best_response_value, cfr_gain, cfr_gain_per_player, cfr_solve, cfr_solve_tree,
    ess_indicator, expected_values, nash_conv, CfrSolver, GameTree, TabularPolicy,
};
use chatgames::game::{DialogueGame, DialogueState, GameConfig, Move, NodeKind};
use chatgames::num::is_distribution;
use common::{brute_force_best_response, brute_force_values, random_policy, random_tree};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::sync::Arc;

#[test]
fn best_response_matches_pure_strategy_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..40 {
        let tree = random_tree(&mut rng, 3);
        let policy = random_policy(&tree, &mut rng);
        for p in 0..2 {
            let fast = best_response_value(&tree, &policy, p);
            let slow = brute_force_best_response(&tree, &policy, p);
            assert_abs_diff_eq!(fast, slow, epsilon = 1e-9);
        }
    }
}

#[test]
fn best_response_policy_attains_its_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let tree = random_tree(&mut rng, 3);
        let policy = random_policy(&tree, &mut rng);
        for p in 0..2 {
            let (value, br) = best_response(&tree, &policy, p);
            // `br` differs from `policy` only at p's infosets.
            assert_abs_diff_eq!(brute_force_values(&tree, &br)[p], value, epsilon = 1e-9);
        }
    }
}

#[test]
fn expected_values_match_plain_recursion() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let tree = random_tree(&mut rng, 3);
        let policy = random_policy(&tree, &mut rng);
        let fast = expected_values(&tree, &policy);
        let slow = brute_force_values(&tree, &policy);
        for (a, b) in fast.iter().zip(&slow) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
}

#[test]
fn nash_conv_is_never_negative() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..30 {
        let tree = random_tree(&mut rng, 3);
        let policy = random_policy(&tree, &mut rng);
        assert!(nash_conv(&tree, &policy) >= -1e-9);
    }
}

fn mp_tree() -> GameTree<f64> {
    GameTree::build(&matching_pennies(AnyEmbedding::Dominated).unwrap()).unwrap()
}

#[test]
fn nash_conv_vanishes_at_the_matching_pennies_equilibrium() {
    let tree = mp_tree();
    let nash = TabularPolicy::constant(vec![0.5, 0.5, 0.0]);
    assert_abs_diff_eq!(nash_conv(&tree, &nash), 0.0, epsilon = 1e-9);
    let off = TabularPolicy::constant(vec![0.6, 0.4, 0.0]);
    assert!(nash_conv(&tree, &off) > 0.1);
}

#[test]
fn matrix_embedding_hides_the_first_move() {
    let tree = mp_tree();
    assert_eq!(tree.num_leaves(), 9);
    assert_eq!(tree.player_infosets(0).len(), 1);
    assert_eq!(tree.player_infosets(1).len(), 1);
}

#[test]
fn cfr_solves_matching_pennies() {
    let tree = GameTree::<f64>::build(&matching_pennies(AnyEmbedding::Uniform).unwrap()).unwrap();
    let policy = cfr_solve_tree(&tree, 10_000);
    for info in &tree.infosets {
        for p in effective_play(policy.probs(&info.key)) {
            assert!((p - 0.5).abs() <= 0.01);
        }
    }
    assert!(nash_conv(&tree, &policy) <= 1e-2);
}

#[test]
fn cfr_with_dominated_any_decays_like_inverse_root() {
    // The symmetric fixed point is unstable under simultaneous updates: rounding noise grows into
    // full cycling, so only the average policy converges, at the 1/sqrt(T) rate.
    let tree = mp_tree();
    let mut solver = CfrSolver::new(&tree);
    solver.run(10_000);
    let policy = solver.average_policy();
    for info in &tree.infosets {
        let p = policy.probs(&info.key);
        assert!((p[0] - 0.5).abs() <= 0.01 && (p[1] - 0.5).abs() <= 0.01, "{p:?}");
    }
    let at_10k = nash_conv(&tree, &policy);
    solver.run(90_000);
    let at_100k = nash_conv(&tree, &solver.average_policy());
    assert!(at_100k <= at_10k / 2.0, "{at_10k} -> {at_100k}");
}

#[test]
fn cfr_solves_rock_paper_scissors() {
    let game = rock_paper_scissors(AnyEmbedding::Dominated).unwrap();
    let (tree, policy) = cfr_solve::<f64>(&game, 10_000).unwrap();
    assert!(nash_conv(&tree, &policy) <= 1e-2);
    for info in &tree.infosets {
        assert!(is_distribution(policy.probs(&info.key), 1e-9));
    }
}

#[test]
fn nash_conv_decreases_on_a_decade_grid() {
    for game in [
        matching_pennies(AnyEmbedding::Dominated).unwrap(),
        rock_paper_scissors(AnyEmbedding::Dominated).unwrap(),
        rock_paper_scissors(AnyEmbedding::Uniform).unwrap(),
    ] {
        let tree = GameTree::<f64>::build(&game).unwrap();
        let mut solver = CfrSolver::new(&tree);
        let mut last = f64::INFINITY;
        let mut done = 0;
        for target in [10, 100, 1000, 10_000] {
            solver.run(target - done);
            done = target;
            let nc = nash_conv(&tree, &solver.average_policy());
            assert!(nc <= last + 1e-6, "{nc} after {target} > {last}");
            last = nc;
        }
    }
}

#[test]
fn cfr_runs_in_single_precision() {
    let game = rock_paper_scissors(AnyEmbedding::Dominated).unwrap();
    let (tree, policy) = cfr_solve::<f32>(&game, 5000).unwrap();
    assert!(nash_conv(&tree, &policy) <= 1e-2);
}

#[test]
fn cfr_is_deterministic() {
    let game = DialogueGame::new(example_fruit_config(), BackendBundle::stub(StubProfile::default())).unwrap();
    let (_, a) = cfr_solve::<f64>(&game, 200).unwrap();
    let (_, b) = cfr_solve::<f64>(&game, 200).unwrap();
    assert_eq!(a, b);
}

struct NeverEnds;

impl TerminationJudge for NeverEnds {
    fn judge_terminal(&self, _: &GameConfig, _: &DialogueState) -> Result<bool, BackendError> {
        Ok(false)
    }
}

#[test]
fn example_tree_runs_to_the_depth_cap() {
    let backends = BackendBundle::stub(StubProfile::default()).with_terminator(Arc::new(NeverEnds));
    let game = DialogueGame::new(example_fruit_config(), backends).unwrap();
    let tree = GameTree::<f64>::build(&game).unwrap();
    // 4 actions × 2 seeds per reply, one reply each.
    assert_eq!(tree.num_leaves(), 64);
}

#[test]
fn example_tree_has_the_enumerated_infostates() {
    let game = DialogueGame::new(example_fruit_config(), BackendBundle::stub(StubProfile::default())).unwrap();
    let tree = GameTree::<f64>::build(&game).unwrap();

    // Oracle: walk the first round directly and collect the distinct second-mover keys.
    let root = game.root();
    let NodeKind::Decision(first) = game.node_kind(&root) else { panic!("root is a decision") };
    let mut second = HashSet::new();
    for a in game.legal_actions(&root).unwrap() {
        let s = game.apply(&root, Move::Action(a)).unwrap();
        for (seed, _) in game.chance_outcomes(&s).unwrap() {
            let t = game.apply(&s, Move::Seed(seed)).unwrap();
            if let NodeKind::Decision(p) = game.node_kind(&t) {
                assert_ne!(p, first);
                second.insert(game.infostate_key(&t, p).canonical());
            }
        }
    }
    assert!(second.len() <= 8);
    assert_eq!(tree.infosets.len(), 1 + second.len());
}

#[test]
fn tree_building_reuses_memoized_transitions() {
    let game = DialogueGame::new(example_fruit_config(), BackendBundle::stub(StubProfile::default())).unwrap();
    GameTree::<f64>::build(&game).unwrap();
    let first = game.stats();
    GameTree::<f64>::build(&game).unwrap();
    assert_eq!(game.stats(), first);
    assert!(first.total() <= game.distinct_transitions().total());
}

#[test]
fn strict_dominance_family_gain_equals_the_gap() {
    // Each player earns 0.5 for `calm` and nothing otherwise; `any` is the baseline.
    let gap = 0.5;
    let config = matrix_config(&["calm", "assertive", "submissive"], -1.0, 1.0);
    let game = matrix_game(config, PayoffTableReward::separable(&[gap, 0.0, 0.0, 0.0])).unwrap();
    let (tree, policy) = cfr_solve::<f64>(&game, 2000).unwrap();
    let baseline = baseline_policy(tree.num_actions, 3);
    let gain = cfr_gain(&tree, &policy, &baseline);
    let nc = nash_conv(&tree, &policy);
    assert!((gain - gap).abs() <= 1e-2, "gain {gain}");
    assert!(nc <= 1e-2);
    assert!(ess_indicator(nc, gain));
    for g in cfr_gain_per_player(&tree, &policy, &baseline) {
        assert!((g - gap).abs() <= 1e-2);
    }
}

#[test]
fn stub_backed_dominance_family_through_the_full_engine() {
    // The stub generator reveals the instruction in its text; separable payoffs make that harmless.
    let backends = BackendBundle::stub(StubProfile::default())
        .with_reward(Arc::new(PayoffTableReward::separable(&[0.0, 0.25, 0.0, 0.0])))
        .with_terminator(Arc::new(NeverEnds));
    let mut config = example_fruit_config();
    config.min_utility = -1.0;
    config.max_utility = 1.0;
    let game = DialogueGame::new(config, backends).unwrap();
    let (tree, policy) = cfr_solve::<f64>(&game, 2000).unwrap();
    let gain = cfr_gain(&tree, &policy, &baseline_policy(tree.num_actions, 3));
    assert!((gain - 0.25).abs() <= 1e-2, "gain {gain}");
    assert!(nash_conv(&tree, &policy) <= 1e-2);
}

#[test]
fn ess_is_strict() {
    assert!(ess_indicator(0.024, 0.106));
    assert!(!ess_indicator(0.5, 0.5));
    assert!(!ess_indicator(0.2, 0.1));
}

#[test]
fn policy_json_round_trips() {
    let game = matching_pennies(AnyEmbedding::Dominated).unwrap();
    let (_, policy) = cfr_solve::<f64>(&game, 100).unwrap();
    let back = TabularPolicy::<f64>::from_json(&policy.to_json(), policy.num_actions).unwrap();
    assert_eq!(back.table, policy.table);
}

#[test]
fn best_response_against_uniform_and_pure_matching_pennies() {
    let tree = mp_tree();
    let uniform_concrete = TabularPolicy::constant(vec![0.5, 0.5, 0.0]);
    assert_abs_diff_eq!(best_response_value(&tree, &uniform_concrete, 0), 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(best_response_value(&tree, &uniform_concrete, 1), 0.0, epsilon = 1e-12);
    let heads = TabularPolicy::pure(3, 0);
    assert_abs_diff_eq!(best_response_value(&tree, &heads, 0), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(best_response_value(&tree, &heads, 1), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(nash_conv(&tree, &heads), 2.0, epsilon = 1e-12);
}

#[test]
fn one_iteration_gives_the_uniform_average() {
    let game = DialogueGame::new(example_fruit_config(), BackendBundle::stub(StubProfile::default())).unwrap();
    let (tree, policy) = cfr_solve::<f64>(&game, 1).unwrap();
    for info in &tree.infosets {
        assert_eq!(policy.probs(&info.key), &[0.25; 4]);
    }
}

#[test]
fn dominant_action_takes_the_mass() {
    let config = matrix_config(&["calm", "assertive", "submissive"], -1.0, 1.0);
    let game = matrix_game(config, PayoffTableReward::separable(&[1.0, 0.0, 0.0, 0.0])).unwrap();
    let (tree, policy) = cfr_solve::<f64>(&game, 1000).unwrap();
    for info in &tree.infosets {
        assert!(policy.probs(&info.key)[0] >= 0.99);
    }
}

#[test]
fn gain_of_the_baseline_itself_is_zero() {
    let game = DialogueGame::new(example_fruit_config(), BackendBundle::stub(StubProfile::default())).unwrap();
    let tree = GameTree::<f64>::build(&game).unwrap();
    let baseline = baseline_policy(4, 3);
    assert_eq!(cfr_gain(&tree, &baseline, &baseline), 0.0);
}

/// Expected returns computed through the game engine itself, without the tree.
fn engine_values(game: &DialogueGame, state: &DialogueState, profile: [&TabularPolicy<f64>; 2]) -> Vec<f64> {
    match game.node_kind(state) {
        NodeKind::Terminal => game.returns(state).unwrap(),
        NodeKind::Chance => {
            let mut acc = vec![0.0; 2];
            for (seed, p) in game.chance_outcomes(state).unwrap() {
                let v = engine_values(game, &game.apply(state, Move::Seed(seed)).unwrap(), profile);
                acc.iter_mut().zip(v).for_each(|(a, x)| *a += p * x);
            }
            acc
        }
        NodeKind::Decision(player) => {
            let key = game.infostate_key(state, player).canonical();
            let probs = profile[player].probs(&key).to_vec();
            let mut acc = vec![0.0; 2];
            for (a, p) in probs.iter().enumerate() {
                if *p == 0.0 {
                    continue;
                }
                let v = engine_values(game, &game.apply(state, Move::Action(a)).unwrap(), profile);
                acc.iter_mut().zip(v).for_each(|(x, y)| *x += p * y);
            }
            acc
        }
    }
}

#[test]
fn gain_matches_direct_enumeration_on_the_64_leaf_game() {
    let backends = BackendBundle::stub(StubProfile::default()).with_terminator(Arc::new(NeverEnds));
    let game = DialogueGame::new(example_fruit_config(), backends).unwrap();
    let (tree, policy) = cfr_solve::<f64>(&game, 300).unwrap();
    assert_eq!(tree.num_leaves(), 64);
    let baseline = baseline_policy(4, 3);
    let root = game.root();
    let base = engine_values(&game, &root, [&baseline, &baseline]);
    let oracle = (engine_values(&game, &root, [&policy, &baseline])[0] - base[0]
        + engine_values(&game, &root, [&baseline, &policy])[1]
        - base[1])
        / 2.0;
    assert_abs_diff_eq!(cfr_gain(&tree, &policy, &baseline), oracle, epsilon = 1e-9);
}

use chatgames::backends::{BackendBundle, StubProfile};
use chatgames::domains::generate_config;
use chatgames::game::DomainId;
use chatgames::nfg::MetaSolver;
use chatgames::psro::{
    br_categorical, br_shotgun, estimate_payoff_tensor, marginals_csv, psro_loop, seed_tuple, BrOperator, Candidate, CandidateSet,
    GameFamily, LlmProposer, PsroConfig, PsroError, RepeatProposer, ScriptedProposer, StopReason,
};
use std::collections::HashSet;

fn family() -> GameFamily {
    GameFamily::new((0..2).map(|s| generate_config(DomainId::Fruit, s).unwrap()).collect())
}

fn scripted_config(symmetric: bool) -> PsroConfig {
    PsroConfig { k: 1, max_outer_iterations: 10, rollouts_per_cell: 2, symmetric, ..PsroConfig::default() }
}

fn run(config: &PsroConfig, script: &[&str]) -> chatgames::psro::PsroTrace {
    let backends = BackendBundle::stub(StubProfile::default());
    let mut proposer = ScriptedProposer::new(script.iter().copied());
    psro_loop(config, &family(), &backends, &mut proposer).unwrap()
}

#[test]
fn scripted_labels_join_in_order_until_a_duplicate() {
    let trace = run(&scripted_config(true), &["angry", "relaxed", "enthusiastic", "angry"]);
    let added: Vec<String> =
        trace.iterations.iter().flat_map(|it| it.new_candidates.iter().map(|c| c.label.clone())).collect();
    assert_eq!(added, ["angry", "relaxed", "enthusiastic"]);
    assert_eq!(trace.stop, StopReason::NoNewCandidates { iteration: 4 });
    assert_eq!(trace.iterations.len(), 4);
    for p in 0..2 {
        assert_eq!(
            trace.final_set.labels(p),
            ["calm", "assertive", "submissive", "any", "angry", "relaxed", "enthusiastic"]
        );
    }
    for (t, it) in trace.iterations.iter().enumerate() {
        assert_eq!(it.labels[0].len(), 4 + t);
        for m in &it.marginals {
            assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn traces_are_bytewise_reproducible() {
    let script = ["angry", "relaxed", "enthusiastic", "angry"];
    let a = run(&scripted_config(true), &script);
    let b = run(&scripted_config(true), &script);
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(marginals_csv(&a), marginals_csv(&b));
}

#[test]
fn asymmetric_runs_grow_each_player_separately() {
    let trace = run(&scripted_config(false), &["angry", "relaxed", "angry", "relaxed"]);
    assert_eq!(trace.iterations[1].new_candidates.len(), 2);
    assert!(trace.final_set.contains(0, "angry"));
    assert!(trace.final_set.contains(1, "relaxed"));
    assert!(!trace.final_set.contains(1, "angry"));
}

#[test]
fn max_iterations_bounds_the_loop() {
    let config = PsroConfig { max_outer_iterations: 2, ..scripted_config(true) };
    let trace = run(&config, &["angry", "relaxed", "enthusiastic"]);
    assert_eq!(trace.stop, StopReason::MaxIterations);
    assert_eq!(trace.iterations.len(), 3);
}

#[test]
fn repeated_proposals_stop_at_the_first_round() {
    let backends = BackendBundle::stub(StubProfile::default());
    for operator in [BrOperator::Shotgun, BrOperator::Better, BrOperator::Trajectory, BrOperator::Categorical] {
        let config = PsroConfig { br_operator: operator, ..scripted_config(true) };
        let mut proposer = RepeatProposer("calm".into());
        let trace = psro_loop(&config, &family(), &backends, &mut proposer).unwrap();
        assert_eq!(trace.stop, StopReason::NoNewCandidates { iteration: 1 }, "{operator:?}");
    }
}

#[test]
fn every_meta_solver_drives_the_loop() {
    for solver in [MetaSolver::RegretMatching, MetaSolver::Replicator, MetaSolver::NashBargaining] {
        let config = PsroConfig { meta_solver: solver, ..scripted_config(true) };
        let trace = run(&config, &["angry"]);
        assert_eq!(trace.stop, StopReason::NoNewCandidates { iteration: 2 });
    }
}

#[test]
fn shotgun_returns_the_best_scored_novel_label() {
    let current = vec![Candidate::new("calm")];
    let mut proposer = ScriptedProposer::new(["calm", "b", "ccc", "dd"]);
    let mut evaluator = |_: usize, label: &str| Ok::<_, PsroError>(label.len() as f64);
    let best = br_shotgun(0, &current, 3, &mut proposer, &mut evaluator).unwrap();
    assert_eq!(best.label, "ccc");
    assert_eq!(best.score, Some(3.0));
}

#[test]
fn exhausted_proposer_is_an_error() {
    let mut proposer = ScriptedProposer::new(Vec::<String>::new());
    let mut evaluator = |_: usize, _: &str| Ok::<_, PsroError>(0.0);
    let err = br_shotgun(1, &[Candidate::new("x")], 2, &mut proposer, &mut evaluator).unwrap_err();
    assert!(matches!(err, PsroError::ProposerExhausted { player: 1, .. }));
}

#[test]
fn categorical_prefers_the_higher_mean_category() {
    let mut proposer = ScriptedProposer::new(["polite", "rude", "hi", "yo", "furious", "livid"]);
    let mut evaluator = |_: usize, label: &str| Ok::<_, PsroError>(label.len() as f64);
    let r = br_categorical(0, &[Candidate::new("neutral")], 2, 2, &mut proposer, &mut evaluator).unwrap();
    assert_eq!(r.category, "rude");
    assert_eq!(r.best_label.label, "furious");
    assert_eq!(r.mean_score, 6.0);
}

#[test]
fn candidate_sets_deduplicate_after_normalization() {
    let mut set = CandidateSet::new(&["calm"], 2).unwrap();
    assert!(!set.push(0, "  CALM "));
    assert!(!set.push(0, "   "));
    assert!(set.push(0, "angry"));
    assert!(!set.contains(1, "angry"));
    assert!(CandidateSet::new(&["a", "A"], 2).is_err());
}

#[test]
fn seed_tuples_enumerate_every_combination() {
    let config = generate_config(DomainId::Fruit, 0).unwrap();
    let base = config.num_llm_seeds as usize;
    let depth = config.num_players * config.num_max_replies as usize;
    let total = base.pow(depth as u32);
    let tuples: HashSet<Vec<u32>> = (0..total).map(|i| seed_tuple(&config, i)).collect();
    assert_eq!(tuples.len(), total);
    assert_eq!(seed_tuple(&config, total), seed_tuple(&config, 0));
}

#[test]
fn llm_answers_are_parsed_into_labels() {
    let labels = LlmProposer::parse("Here are some ideas:\n- Angry.\n  - relaxed\n\n* enthusiastic\n-");
    assert_eq!(labels, ["Angry", "relaxed", "enthusiastic"]);
}

#[test]
fn invalid_configs_are_rejected() {
    let backends = BackendBundle::stub(StubProfile::default());
    let mut proposer = RepeatProposer("x".into());
    for config in [
        PsroConfig { k: 0, ..PsroConfig::default() },
        PsroConfig { rollouts_per_cell: 0, ..PsroConfig::default() },
        PsroConfig { initial_labels: vec![], ..PsroConfig::default() },
    ] {
        assert!(matches!(psro_loop(&config, &family(), &backends, &mut proposer), Err(PsroError::InvalidConfig(_))));
    }
}

#[test]
fn full_coverage_tensors_do_not_depend_on_rollout_order() {
    let family = family();
    let backends = BackendBundle::stub(StubProfile::with_follow_rate(0.5));
    let labels: Vec<String> = ["calm", "assertive", "any"].map(String::from).to_vec();
    let n = family.schedule_len();
    let a = estimate_payoff_tensor(&labels, &labels, &family, &backends, n, 0).unwrap();
    let b = estimate_payoff_tensor(&labels, &labels, &family, &backends, n, 12345).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x[0] - y[0]).abs() <= 1e-12 && (x[1] - y[1]).abs() <= 1e-12);
    }
}

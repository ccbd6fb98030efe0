//! The acceptance suite: every criterion runs at its stated tolerance and prints one line.
//! The process exits non-zero when any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use chatgames::backends::{BackendBundle, OutcomeTag, RewardModel, StubClassifier, StubGenerator, StubProfile};
use chatgames::domains::generate_config;
use chatgames::domains::matrix::{matching_pennies, rock_paper_scissors, AnyEmbedding};
use chatgames::efg::{cfr_solve, ess_indicator, nash_conv};
use chatgames::eval::{reward_error, steering_accuracy, steering_labels};
use chatgames::game::DomainId;
use chatgames::nfg::{nash_bargaining, regret_matching_cce, replicator_step, BargainingConfig, PayoffTensor};
use chatgames::psro::{psro_loop, GameFamily, PsroConfig, ScriptedProposer, StopReason};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cfr_correctness() -> Outcome {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;
    for (name, game) in [
        ("matching pennies", matching_pennies(AnyEmbedding::Uniform)),
        ("rock-paper-scissors", rock_paper_scissors(AnyEmbedding::Uniform)),
    ] {
        let game = game.map_err(|e| e.to_string())?;
        let (tree, policy) = cfr_solve::<f64>(&game, 10_000).map_err(|e| e.to_string())?;
        let nc = nash_conv(&tree, &policy);
        ok &= nc <= 1e-2;
        details.push(format!("{name} nashconv {nc:.2e}"));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs <= 60.0;
    details.push(format!("{secs:.1} s"));
    // Under the uniform embedding CFR's uniform start is already an equilibrium. The dominated
    // embedding makes the dynamics move; its values are reported for reference only.
    let mut reference = Vec::new();
    for (name, game) in [
        ("matching pennies", matching_pennies(AnyEmbedding::Dominated)),
        ("rock-paper-scissors", rock_paper_scissors(AnyEmbedding::Dominated)),
    ] {
        let game = game.map_err(|e| e.to_string())?;
        let (tree, policy) = cfr_solve::<f64>(&game, 10_000).map_err(|e| e.to_string())?;
        reference.push(format!("{name} {:.2e}", nash_conv(&tree, &policy)));
    }
    details.push(format!("[dominated-any reference: {}]", reference.join(", ")));
    check(ok, details.join(", "))
}

fn nashconv_oracle() -> Outcome {
    let gap = common::best_response_oracle_gap(20, 2024);
    check(gap <= 1e-9, format!("max |BR − brute force| {gap:.1e} over 20 games"))
}

fn worked_reward() -> Outcome {
    let (config, accepted, rejected) = common::worked_trade();
    let oracle = common::ground_truth();
    let a = oracle.score(&config, &accepted).map_err(|e| e.to_string())?.values;
    let r = oracle.score(&config, &rejected).map_err(|e| e.to_string())?.values;
    check(a == [3.0, -3.0] && r == [0.0, 0.0], format!("trade {a:?}, rejection {r:?}"))
}

fn reward_metrology() -> Outcome {
    let oracle = common::ground_truth();
    let stub = BackendBundle::stub(StubProfile::default());
    let mut ok = true;
    let mut worst_identity: f64 = 0.0;
    let mut worst_flip: f64 = 0.0;
    let start = Instant::now();
    for domain in [DomainId::Fruit, DomainId::Meeting] {
        for outcome in OutcomeTag::ALL {
            let same = reward_error(stub.reward.as_ref(), &oracle, domain, outcome, 1000, 0).map_err(|e| e.to_string())?;
            let row = &same.rows[0];
            worst_identity = worst_identity.max(row.norm).max(row.sgn);
            ok &= row.samples == 2000;
            let flip = common::SignFlip::new(common::ground_truth());
            let flipped = reward_error(&flip, &oracle, domain, outcome, 1000, 0).map_err(|e| e.to_string())?;
            worst_flip = worst_flip.max((flipped.rows[0].sgn - flip.nonzero_fraction()).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= worst_identity == 0.0 && worst_flip <= 1e-12 && secs <= 10.0;
    check(
        ok,
        format!("oracle-as-model error {worst_identity}, sign-flip gap {worst_flip:.1e}, {secs:.2} s for 12 runs of 1000"),
    )
}

fn template_round_trip() -> Outcome {
    let (exact, total) = common::fruit_template_round_trip(1000, 0);
    check(exact == total && total == 3000, format!("{exact}/{total} exact"))
}

fn steering_statistics() -> Outcome {
    let n = 10_000;
    let generator = StubGenerator::new(StubProfile::with_follow_rate(0.75));
    let labels = steering_labels(DomainId::Debate);
    let r = steering_accuracy(&generator, &StubClassifier, DomainId::Debate, &labels, n, 0).map_err(|e| e.to_string())?;
    let sigma = (0.75f64 * 0.25 / n as f64).sqrt();
    check((r.overall - 0.75).abs() <= 3.0 * sigma, format!("accuracy {:.4}, 3σ band ±{:.4}", r.overall, 3.0 * sigma))
}

fn normal_form_solvers() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let t = 4_000;
    let mut worst_regret = f64::NEG_INFINITY;
    for _ in 0..20 {
        let tensor = common::random_tensor(&mut rng, 3, 0.0, 1.0);
        worst_regret = worst_regret.max(common::cce_regret_oracle(&tensor, &regret_matching_cce(&tensor, t)));
    }
    let bound = 2.0 / (t as f64).sqrt() + 1e-6;

    let rps = PayoffTensor::<f64>::zero_sum(&[vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]])
        .map_err(|e| e.to_string())?;
    let mut x = vec![1.0 / 3.0; 3];
    let mut y = x.clone();
    let mut drift: f64 = 0.0;
    for _ in 0..1000 {
        let (nx, ny) = replicator_step(&rps, &x, &y, 0.01).map_err(|e| e.to_string())?;
        for (a, b) in nx.iter().zip(&x).chain(ny.iter().zip(&y)) {
            drift = drift.max((a - b).abs());
        }
        (x, y) = (nx, ny);
    }

    let mut worst_bargain: f64 = 0.0;
    for _ in 0..20 {
        let tensor = common::random_tensor(&mut rng, 3, -1.0, 2.0);
        let s = nash_bargaining(&tensor, None, BargainingConfig::default());
        worst_bargain = worst_bargain.max((s.product - common::bargaining_grid_oracle(&tensor, s.disagreement)).abs());
    }
    let pair = PayoffTensor::<f64>::new(
        vec!["a".into(), "b".into()],
        vec!["a".into(), "b".into()],
        vec![[0.0, 0.0], [2.0, 1.0], [1.0, 2.0], [0.0, 0.0]],
    )
    .map_err(|e| e.to_string())?;
    let v = nash_bargaining(&pair, Some([0.0, 0.0]), BargainingConfig::default()).value;
    let symmetric = (v[0] - 1.5).abs() <= 1e-6 && (v[1] - 1.5).abs() <= 1e-6;

    check(
        worst_regret <= bound && drift <= 1e-9 && worst_bargain <= 1e-3 && symmetric,
        format!(
            "CCE regret {worst_regret:.2e} ≤ {bound:.2e}, replicator drift {drift:.1e}, bargaining gap {worst_bargain:.1e}, \
             pair value ({:.4}, {:.4})",
            v[0], v[1]
        ),
    )
}

fn psro_mechanics() -> Outcome {
    let run = || -> Result<chatgames::psro::PsroTrace, String> {
        let family = GameFamily::new(
            (0..2).map(|s| generate_config(DomainId::Fruit, s)).collect::<Result<_, _>>().map_err(|e| e.to_string())?,
        );
        let config = PsroConfig { k: 1, max_outer_iterations: 10, rollouts_per_cell: 2, ..PsroConfig::default() };
        let mut proposer = ScriptedProposer::new(["angry", "relaxed", "enthusiastic", "angry"]);
        psro_loop(&config, &family, &BackendBundle::stub(StubProfile::default()), &mut proposer).map_err(|e| e.to_string())
    };
    let a = run()?;
    let b = run()?;
    let added: Vec<String> =
        a.iterations.iter().flat_map(|it| it.new_candidates.iter().map(|c| c.label.clone())).collect();
    let stopped = a.stop == StopReason::NoNewCandidates { iteration: 4 };
    let same = a.to_json() == b.to_json();
    check(
        added == ["angry", "relaxed", "enthusiastic"] && stopped && same,
        format!("added {added:?}, stop {:?}, reproducible {same}", a.stop),
    )
}

fn imitation_numerics() -> Outcome {
    let fd = common::finite_difference_gap(3);
    let (gap, secs) = common::single_example_entropy_gap(5);
    check(
        fd <= 1e-4 && (-1e-9..=0.01).contains(&gap) && secs <= 120.0,
        format!("gradient rel. error {fd:.1e}, entropy gap {gap:.2e} after 10000 steps in {secs:.1} s"),
    )
}

fn ess_on_published_values() -> Outcome {
    let rows = [("fruit", 0.024, 0.106), ("meeting", 0.010, 0.037), ("debate", 0.009, 0.038)];
    let verdicts: Vec<bool> = rows.iter().map(|(_, nc, gain)| ess_indicator(*nc, *gain)).collect();
    check(verdicts.iter().all(|v| *v), format!("{:?}", rows.iter().map(|r| r.0).zip(&verdicts).collect::<Vec<_>>()))
}

fn end_to_end_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for name in ["first", "second"] {
        let out = dir.path().join(name);
        let output = Command::new(env!("CARGO_BIN_EXE_chatgames"))
            .args(["eval-table1", "--backend", "stub", "--seed", "7", "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !output.status.success() {
            return Err(format!("exit {:?}", output.status.code()));
        }
        let csv = std::fs::read(out.join("table1.csv")).map_err(|e| e.to_string())?;
        let games = std::fs::read(out.join("table1_games.csv")).map_err(|e| e.to_string())?;
        runs.push((csv, games, String::from_utf8_lossy(&output.stderr).into_owned()));
    }
    let identical = runs[0].0 == runs[1].0 && runs[0].1 == runs[1].1;
    let mut bounded = true;
    let mut totals = Vec::new();
    for line in runs[0].2.lines().filter(|l| l.contains("backend calls")) {
        let numbers: Vec<usize> =
            line.split(|c: char| !c.is_ascii_digit()).filter_map(|t| t.parse().ok()).collect();
        if let [calls, distinct] = numbers[..] {
            bounded &= calls <= distinct;
            totals.push(format!("{calls}≤{distinct}"));
        } else {
            bounded = false;
        }
    }
    check(
        identical && bounded && totals.len() == 3,
        format!("identical bytes {identical}, calls vs distinct transitions [{}]", totals.join(", ")),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("CFR correctness", cfr_correctness),
        ("NashConv oracle equivalence", nashconv_oracle),
        ("worked reward example", worked_reward),
        ("Norm/Sgn metrology", reward_metrology),
        ("template round-trip", template_round_trip),
        ("steering statistics", steering_statistics),
        ("normal-form solvers", normal_form_solvers),
        ("PSRO mechanics", psro_mechanics),
        ("imitation numerics", imitation_numerics),
        ("ESS indicator", ess_on_published_values),
        ("end-to-end determinism", end_to_end_determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}

//! Oracles shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use chatgames::efg::{GameTree, TabularPolicy, TreeNode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug)]
enum Step {
    Chance(usize),
    Decision(usize),
}

#[derive(Clone, Debug)]
enum Seen {
    Chance(usize),
    Act(usize, usize),
}

/// A random two-player perfect-recall tree with at most `max_infosets` infosets per player.
///
/// The move order is fixed per game; each player sees its own actions, and sees each chance
/// outcome and each opponent action according to per-game visibility flags.
pub fn random_tree(rng: &mut ChaCha8Rng, max_infosets: usize) -> GameTree<f64> {
    loop {
        let num_actions = rng.random_range(2..=3);
        let len = rng.random_range(2..=4);
        let mut schedule: Vec<Step> = (0..len)
            .map(|_| if rng.random_bool(0.3) { Step::Chance(rng.random_range(2..=3)) } else { Step::Decision(rng.random_range(0..2)) })
            .collect();
        if !schedule.iter().any(|s| matches!(s, Step::Decision(0))) {
            schedule.push(Step::Decision(0));
        }
        if !schedule.iter().any(|s| matches!(s, Step::Decision(1))) {
            schedule.push(Step::Decision(1));
        }
        let sees_chance = [rng.random_bool(0.5), rng.random_bool(0.5)];
        let sees_opponent = [rng.random_bool(0.5), rng.random_bool(0.5)];
        let mut tree = GameTree::new(2, num_actions);
        build(&mut tree, rng, &schedule, 0, &mut Vec::new(), sees_chance, sees_opponent);
        let fits = (0..2).all(|p| tree.player_infosets(p).len() <= max_infosets);
        if fits && !tree.infosets.is_empty() {
            return tree;
        }
    }
}

fn view(history: &[Seen], player: usize, sees_chance: [bool; 2], sees_opponent: [bool; 2]) -> String {
    let mut key = format!("p{player}");
    for h in history {
        match h {
            Seen::Chance(o) if sees_chance[player] => key.push_str(&format!("|c{o}")),
            Seen::Chance(_) => key.push_str("|c?"),
            Seen::Act(q, a) if *q == player || sees_opponent[player] => key.push_str(&format!("|{q}:{a}")),
            Seen::Act(q, _) => key.push_str(&format!("|{q}:?")),
        }
    }
    key
}

fn build(
    tree: &mut GameTree<f64>,
    rng: &mut ChaCha8Rng,
    schedule: &[Step],
    depth: usize,
    history: &mut Vec<Seen>,
    sees_chance: [bool; 2],
    sees_opponent: [bool; 2],
) -> usize {
    if depth == schedule.len() {
        let returns = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        return tree.push(TreeNode::Terminal { returns });
    }
    match schedule[depth] {
        Step::Chance(k) => {
            let id = tree.push(TreeNode::Chance { outcomes: Vec::new() });
            let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let mut outcomes = Vec::new();
            for (o, w) in raw.iter().enumerate() {
                history.push(Seen::Chance(o));
                let child = build(tree, rng, schedule, depth + 1, history, sees_chance, sees_opponent);
                history.pop();
                outcomes.push((w / total, child));
            }
            tree.nodes[id] = TreeNode::Chance { outcomes };
            id
        }
        Step::Decision(player) => {
            let id = tree.push(TreeNode::Chance { outcomes: Vec::new() });
            let key = view(history, player, sees_chance, sees_opponent);
            let infoset = tree.intern(player, key, id);
            let mut children = Vec::new();
            for a in 0..tree.num_actions {
                history.push(Seen::Act(player, a));
                children.push(build(tree, rng, schedule, depth + 1, history, sees_chance, sees_opponent));
                history.pop();
            }
            tree.nodes[id] = TreeNode::Decision { player, infoset, children };
            id
        }
    }
}

/// Random full-support distributions at every infoset.
pub fn random_policy(tree: &GameTree<f64>, rng: &mut ChaCha8Rng) -> TabularPolicy<f64> {
    let mut policy = TabularPolicy::uniform(tree.num_actions);
    for info in &tree.infosets {
        let raw: Vec<f64> = (0..tree.num_actions).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        policy.set(info.key.clone(), raw.iter().map(|x| x / total).collect());
    }
    policy
}

/// Expected returns when `player` plays `pure[infoset]` and everyone else follows `policy`.
fn value_with_pure(tree: &GameTree<f64>, policy: &TabularPolicy<f64>, player: usize, pure: &[usize], node: usize) -> Vec<f64> {
    match &tree.nodes[node] {
        TreeNode::Terminal { returns } => returns.clone(),
        TreeNode::Chance { outcomes } => {
            let mut acc = vec![0.0; tree.num_players];
            for (p, child) in outcomes {
                let v = value_with_pure(tree, policy, player, pure, *child);
                acc.iter_mut().zip(v).for_each(|(a, x)| *a += p * x);
            }
            acc
        }
        TreeNode::Decision { player: q, infoset, children } => {
            if *q == player {
                value_with_pure(tree, policy, player, pure, children[pure[*infoset]])
            } else {
                let probs = policy.probs(&tree.infosets[*infoset].key).to_vec();
                let mut acc = vec![0.0; tree.num_players];
                for (p, child) in probs.iter().zip(children) {
                    let v = value_with_pure(tree, policy, player, pure, *child);
                    acc.iter_mut().zip(v).for_each(|(a, x)| *a += p * x);
                }
                acc
            }
        }
    }
}

/// Best-response value by enumerating every pure strategy of `player`.
pub fn brute_force_best_response(tree: &GameTree<f64>, policy: &TabularPolicy<f64>, player: usize) -> f64 {
    let mine = tree.player_infosets(player);
    let mut pure = vec![0usize; tree.infosets.len()];
    let total = tree.num_actions.pow(mine.len() as u32);
    let mut best = f64::NEG_INFINITY;
    for mut code in 0..total {
        for &i in &mine {
            pure[i] = code % tree.num_actions;
            code /= tree.num_actions;
        }
        best = best.max(value_with_pure(tree, policy, player, &pure, 0)[player]);
    }
    best
}

/// Expected returns of `policy` for all players, by plain recursion.
pub fn brute_force_values(tree: &GameTree<f64>, policy: &TabularPolicy<f64>) -> Vec<f64> {
    fn go(tree: &GameTree<f64>, policy: &TabularPolicy<f64>, node: usize) -> Vec<f64> {
        match &tree.nodes[node] {
            TreeNode::Terminal { returns } => returns.clone(),
            TreeNode::Chance { outcomes } => {
                let mut acc = vec![0.0; tree.num_players];
                for (p, child) in outcomes {
                    acc.iter_mut().zip(go(tree, policy, *child)).for_each(|(a, x)| *a += p * x);
                }
                acc
            }
            TreeNode::Decision { infoset, children, .. } => {
                let probs = policy.probs(&tree.infosets[*infoset].key).to_vec();
                let mut acc = vec![0.0; tree.num_players];
                for (p, child) in probs.iter().zip(children) {
                    acc.iter_mut().zip(go(tree, policy, *child)).for_each(|(a, x)| *a += p * x);
                }
                acc
            }
        }
    }
    go(tree, policy, 0)
}

/// Best-response oracle check on `games` random games; returns the largest absolute gap.
pub fn best_response_oracle_gap(games: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..games {
        let tree = random_tree(&mut rng, 3);
        let policy = random_policy(&tree, &mut rng);
        for p in 0..2 {
            let fast = chatgames::efg::best_response_value(&tree, &policy, p);
            worst = worst.max((fast - brute_force_best_response(&tree, &policy, p)).abs());
        }
    }
    worst
}

/// The fruit trade between Alina and Elroy: identical endowments and valuations, a counter-offer
/// accepting two kiwis for one banana. Returns the config, the accepted transcript and the same
/// dialogue ending in a refusal.
pub fn worked_trade() -> (
    chatgames::game::GameConfig,
    chatgames::game::DialogueState,
    chatgames::game::DialogueState,
) {
    use chatgames::domains::example_fruit_config;
    use chatgames::domains::fruit::FruitScenario;
    use chatgames::game::DialogueState;

    let basket = [("apple", 2), ("banana", 1), ("blueberry", 1), ("kiwi", 2)].map(|(f, n)| (f.to_owned(), n));
    let values = [("apple", 6.0), ("banana", 5.0), ("blueberry", 1.0), ("kiwi", 1.0)].map(|(f, v)| (f.to_owned(), v));
    let scenario = FruitScenario {
        endowments: [basket.clone().into(), basket.into()],
        valuations: [values.clone().into(), values.into()],
    };
    let alina = "Hi Elroy,\n\nThanks for your response. I'm glad we agree that bananas are more valuable\n\
than kiwis. Unfortunately, I can't trade two apples for one banana. I'm\n\
willing to trade one apple for one banana, or two kiwis for one banana.\n\n\
Let me know if you're interested in either of those trades.\n\nThanks,\n";
    let elroy = "Hi Alina,\n\nThanks for your response. I understand that you're not willing to trade\n\
two apples for one banana. I'm willing to accept two kiwis for one banana,\n\
if you're still interested.\n\nThanks,\nElroy";
    let refusal = "Hi Alina,\n\nThanks, but I do not want to do this trade.\n\nElroy";

    let mut config = example_fruit_config();
    config.scenario.sender = "Alina".into();
    config.scenario.receiver = "Elroy".into();
    config.player_names = vec!["Alina".into(), "Elroy".into()];
    config.scenario.opening_message = alina.into();
    config.scenario.private_info = vec![scenario.private_info(0), scenario.private_info(1)];
    let (lo, hi) = scenario.utility_bounds();
    config.min_utility = lo;
    config.max_utility = hi;
    let accepted = DialogueState::from_messages(2, &[(0, alina.into()), (1, elroy.into())]);
    let rejected = DialogueState::from_messages(2, &[(0, alina.into()), (1, refusal.into())]);
    (config, accepted, rejected)
}

/// Renders `cases` random fruit outcome cases per outcome, reads each transcript back into
/// template parameters and renders again. Returns (exact matches, total).
pub fn fruit_template_round_trip(cases: usize, seed: u64) -> (usize, usize) {
    use chatgames::backends::OutcomeTag;
    use chatgames::domains::fruit::{fruit_noun, parse_trade};
    use chatgames::domains::patterns::outcome_of;
    use chatgames::domains::templates::{outcome_case, render_outcome_template, TemplateParams};
    use chatgames::game::DomainId;

    let mut exact = 0;
    let mut total = 0;
    for outcome in OutcomeTag::ALL {
        for i in 0..cases as u64 {
            total += 1;
            let case = outcome_case(DomainId::Fruit, outcome, seed.wrapping_add(i)).expect("case");
            let parse = parse_trade(&case.transcript);
            let one = |b: &chatgames::domains::fruit::Basket| -> Option<(String, u32)> {
                (b.len() == 1).then(|| b.iter().next().map(|(f, n)| (f.clone(), *n))).flatten()
            };
            let (Some(proposer), Some((give, n_give)), Some((get, n_get))) =
                (parse.proposer, one(&parse.give), one(&parse.receive))
            else {
                continue;
            };
            let names = &case.config.player_names;
            let params: TemplateParams = [
                ("sender", names[proposer].clone()),
                ("receiver", names[1 - proposer].clone()),
                ("num_give", n_give.to_string()),
                ("fruit_give", fruit_noun(&give, n_give)),
                ("num_receive", n_get.to_string()),
                ("fruit_receive", fruit_noun(&get, n_get)),
            ]
            .into_iter()
            .map(|(k, v)| (k.to_owned(), v))
            .collect();
            let Ok(again) = render_outcome_template(DomainId::Fruit, outcome_of(&case.transcript), &params) else {
                continue;
            };
            let original: Vec<(usize, String)> =
                case.transcript.messages().map(|(p, t)| (p, t.to_owned())).collect();
            if again == original && params == case.params {
                exact += 1;
            }
        }
    }
    (exact, total)
}

/// Reports the negated scores of `inner` and tallies how many of the true scores were nonzero.
pub struct SignFlip<M> {
    pub inner: M,
    pub nonzero: std::sync::atomic::AtomicUsize,
    pub samples: std::sync::atomic::AtomicUsize,
}

impl<M> SignFlip<M> {
    pub fn new(inner: M) -> Self {
        SignFlip { inner, nonzero: Default::default(), samples: Default::default() }
    }

    /// Share of tallied true scores that were nonzero.
    pub fn nonzero_fraction(&self) -> f64 {
        use std::sync::atomic::Ordering;
        self.nonzero.load(Ordering::Relaxed) as f64 / self.samples.load(Ordering::Relaxed) as f64
    }
}

impl<M: chatgames::backends::RewardModel> chatgames::backends::RewardModel for SignFlip<M> {
    fn score(
        &self,
        config: &chatgames::game::GameConfig,
        transcript: &chatgames::game::DialogueState,
    ) -> Result<chatgames::backends::RewardJudgment, chatgames::backends::BackendError> {
        use std::sync::atomic::Ordering;
        let mut j = self.inner.score(config, transcript)?;
        for v in j.values.iter_mut() {
            self.samples.fetch_add(1, Ordering::Relaxed);
            if v.abs() > 1e-9 {
                self.nonzero.fetch_add(1, Ordering::Relaxed);
            }
            *v = -*v;
        }
        Ok(j)
    }
}

/// The ground-truth reward with the stub debate judge.
pub fn ground_truth() -> chatgames::backends::GroundTruthReward {
    use chatgames::backends::{GroundTruthReward, StubClassifier};
    use chatgames::domains::debate::StubDebateJudge;
    GroundTruthReward::new(std::sync::Arc::new(StubDebateJudge::new(std::sync::Arc::new(StubClassifier))))
}

pub fn random_tensor(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> chatgames::nfg::PayoffTensor<f64> {
    let values = (0..n * n).map(|_| [rng.random_range(lo..hi), rng.random_range(lo..hi)]).collect();
    let labels: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
    chatgames::nfg::PayoffTensor::new(labels.clone(), labels, values).unwrap()
}

/// Largest gain from committing to one fixed action ahead of the joint draw, summed cell by cell.
pub fn cce_regret_oracle(tensor: &chatgames::nfg::PayoffTensor<f64>, joint: &chatgames::nfg::JointDistribution<f64>) -> f64 {
    let (n, m) = (tensor.rows(), tensor.cols());
    let mut base = [0.0; 2];
    for r in 0..n {
        for c in 0..m {
            let w = joint.get(r, c);
            let v = tensor.get(r, c);
            base[0] += w * v[0];
            base[1] += w * v[1];
        }
    }
    let mut worst = f64::NEG_INFINITY;
    for dev in 0..n {
        let mut alt = 0.0;
        for r in 0..n {
            for c in 0..m {
                alt += joint.get(r, c) * tensor.get(dev, c)[0];
            }
        }
        worst = worst.max(alt - base[0]);
    }
    for dev in 0..m {
        let mut alt = 0.0;
        for r in 0..n {
            for c in 0..m {
                alt += joint.get(r, c) * tensor.get(r, dev)[1];
            }
        }
        worst = worst.max(alt - base[1]);
    }
    worst
}

/// Best Nash product over every segment between two payoff cells (the 2-D hull boundary is
/// made of such segments), scanned at resolution 1e-3.
pub fn bargaining_grid_oracle(tensor: &chatgames::nfg::PayoffTensor<f64>, d: [f64; 2]) -> f64 {
    let cells: Vec<[f64; 2]> = tensor.values.clone();
    let mut best = f64::NEG_INFINITY;
    for a in &cells {
        for b in &cells {
            for k in 0..=1000 {
                let t = k as f64 / 1000.0;
                let u0 = t * a[0] + (1.0 - t) * b[0] - d[0];
                let u1 = t * a[1] + (1.0 - t) * b[1] - d[1];
                if u0 > 0.0 && u1 > 0.0 {
                    best = best.max(u0 * u1);
                }
            }
        }
    }
    best
}

fn unit_interval_target(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut t: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = t.iter().sum();
    t.iter_mut().for_each(|x| *x /= s);
    t
}

/// Worst relative gap between the analytic loss gradient of a random `16 → 12 → 12 → 4` policy
/// and central differences with step 1e-5, over every parameter.
pub fn finite_difference_gap(seed: u64) -> f64 {
    use chatgames::imitation::MlpPolicy;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let policy = MlpPolicy::<f64>::new(16, 12, 4, seed ^ 0x5eed);
    let data: Vec<(Vec<f64>, Vec<f64>)> = (0..3)
        .map(|_| ((0..16).map(|_| rng.random_range(-1.0..1.0)).collect(), unit_interval_target(&mut rng, 4)))
        .collect();
    let weights = [0.5, 0.25, 0.25];
    let batch: Vec<(&[f64], &[f64], f64)> =
        data.iter().zip(weights).map(|((x, t), w)| (x.as_slice(), t.as_slice(), w)).collect();
    let (_, grad) = policy.loss_and_grad(&batch).expect("batch");
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..policy.params.len() {
        let mut plus = policy.clone();
        plus.params[i] += h;
        let mut minus = policy.clone();
        minus.params[i] -= h;
        let fd = (plus.loss_and_grad(&batch).expect("batch").0 - minus.loss_and_grad(&batch).expect("batch").0)
            / (2.0 * h);
        let scale = grad[i].abs().max(fd.abs()).max(1e-6);
        worst = worst.max((grad[i] - fd).abs() / scale);
    }
    worst
}

/// Trains a default-width policy on one embedded infostate with the default hyperparameters.
/// Returns (final loss − target entropy, seconds).
pub fn single_example_entropy_gap(seed: u64) -> (f64, f64) {
    use chatgames::imitation::{entropy, train, Embedder, HashingEmbedder, MlpPolicy, TrainConfig};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let embedder = HashingEmbedder::default();
    let x = embedder.embed("Bob: I offer two apples for one banana.");
    let target = unit_interval_target(&mut rng, 4);
    let mut policy = MlpPolicy::<f64>::with_default_hidden(embedder.dimension(), 4, seed);
    let start = std::time::Instant::now();
    train(&mut policy, &[(x.clone(), target.clone())], &TrainConfig::default()).expect("training");
    let secs = start.elapsed().as_secs_f64();
    let loss = policy.ce_loss_and_grad(&[(&x, &target)]).expect("batch").0;
    (loss - entropy(&target), secs)
}

//! Subcommand implementations.

use chatgames::backends::{GroundTruthReward, OutcomeTag, RewardModel};
use chatgames::domains::debate::StubDebateJudge;
use chatgames::domains::generate_config;
use chatgames::efg::{baseline_policy, cfr_gain, cfr_solve, ess_indicator, nash_conv};
use chatgames::eval::{reward_error, run_table1_protocol, steering_accuracy, steering_labels, RewardErrorReport, Table1Report};
use chatgames::game::{DialogueGame, DomainId, GameConfig};
use chatgames::imitation::{
    build_dataset_for_seeds, loss_curve_csv, meta_game_election, read_jsonl, split_games, train, write_jsonl,
    AgentPolicy, BaselineAgent, HashingEmbedder, ImitationAgent, MlpPolicy, TrainConfig,
};
use chatgames::nfg::MetaSolver;
use chatgames::psro::{
    marginals_csv, psro_loop, BrOperator, GameFamily, LlmProposer, Proposer, PsroConfig, ScriptedProposer,
    VocabularyProposer,
};
use serde_json::json;
use std::io::BufReader;
use std::path::PathBuf;
use std::sync::Arc;

use crate::setup::{backends, domain, load_config, manifest, out_dir, usage, write};
use crate::{Cli, Command, Failure, ImitateStep};

/// Split between dataset games and held-out election games.
const HELD_OUT_FRACTION: f64 = 0.1;
/// Regret-matching iterations used to solve the election tensor.
const ELECTION_RM_ITERATIONS: usize = 10_000;

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Gen { domain: d, n } => {
            let d = domain(d)?;
            let dir = out_dir(g)?;
            let mut outputs = Vec::new();
            let mut hashes = Vec::new();
            for i in 0..*n as u64 {
                let config = generate_config(d, g.seed + i)?;
                hashes.push(config.config_hash());
                outputs.push(write(&dir, &format!("game_{:04}.json", i), &config.to_json())?);
            }
            manifest(&dir, g, "gen", &hashes, &outputs)
        }
        Command::Cfr { domain: d, iterations } => {
            let config = match load_config(g)? {
                Some(c) => c,
                None => generate_config(domain(d)?, g.seed)?,
            };
            let bundle = backends(g, config.domain_id)?;
            let game = DialogueGame::new(config.clone(), bundle)?;
            let (tree, policy) = cfr_solve::<f64>(&game, *iterations)?;
            let nc = nash_conv(&tree, &policy);
            let gain = cfr_gain(&tree, &policy, &baseline_policy(tree.num_actions, config.any_index()));
            let metrics = Table1Report::csv(&[chatgames::eval::Table1Row {
                domain: config.domain_id.as_str().into(),
                nashconv: nc,
                cfr_gain: gain,
                ess: ess_indicator(nc, gain),
            }]);
            let dir = out_dir(g)?;
            let outputs = vec![write(&dir, "policy.json", &policy.to_json())?, write(&dir, "metrics.csv", &metrics)?];
            print!("{metrics}");
            manifest(&dir, g, "cfr", &[config.config_hash()], &outputs)
        }
        Command::EvalTable1 { domain: d, games, iterations } => {
            let domains = if d == "all" { vec![DomainId::Fruit, DomainId::Meeting, DomainId::Debate] } else { vec![domain(d)?] };
            let mut averages = Vec::new();
            let mut per_game = String::new();
            for d in domains {
                let report = run_table1_protocol(d, *games, g.seed, *iterations, &backends(g, d)?)?;
                let csv = report.games_csv();
                if per_game.is_empty() {
                    per_game.push_str(&csv);
                } else {
                    per_game.extend(csv.lines().skip(1).map(|l| format!("{l}\n")));
                }
                eprintln!(
                    "{}: backend calls {} (distinct transitions {})",
                    d,
                    report.calls.total(),
                    report.distinct.total()
                );
                averages.push(report.average);
            }
            let table = Table1Report::csv(&averages);
            let dir = out_dir(g)?;
            let outputs = vec![write(&dir, "table1.csv", &table)?, write(&dir, "table1_games.csv", &per_game)?];
            print!("{table}");
            manifest(&dir, g, "eval-table1", &[], &outputs)
        }
        Command::Psro { domain: d, scenarios, operator, meta_solver, iterations, rollouts, k, proposer, asymmetric } => {
            let configs: Vec<GameConfig> = match load_config(g)? {
                Some(c) => vec![c],
                None => {
                    let d = domain(d)?;
                    (0..*scenarios as u64).map(|i| generate_config(d, g.seed + i)).collect::<Result<_, _>>()?
                }
            };
            if configs.is_empty() {
                return Err(usage("--scenarios must be at least 1"));
            }
            let bundle = backends(g, configs[0].domain_id)?;
            let config = PsroConfig {
                br_operator: operator.parse::<BrOperator>().map_err(usage)?,
                meta_solver: meta_solver.parse::<MetaSolver>().map_err(usage)?,
                max_outer_iterations: *iterations,
                rollouts_per_cell: *rollouts,
                k: *k,
                symmetric: !asymmetric,
                run_seed: g.seed,
                ..PsroConfig::default()
            };
            let mut proposer: Box<dyn Proposer> = match proposer.as_str() {
                "vocabulary" => Box::new(VocabularyProposer::tones(g.seed)),
                "llm" => Box::new(LlmProposer::new(bundle.generator.clone())),
                list => Box::new(ScriptedProposer::new(list.split(',').map(str::trim).filter(|s| !s.is_empty()))),
            };
            let hashes = configs.iter().map(GameConfig::config_hash).collect::<Vec<_>>();
            let trace = psro_loop(&config, &GameFamily::new(configs), &bundle, proposer.as_mut())?;
            let dir = out_dir(g)?;
            let outputs =
                vec![write(&dir, "trace.json", &trace.to_json())?, write(&dir, "marginals.csv", &marginals_csv(&trace))?];
            println!("final set: {}", trace.final_set.labels(0).join(", "));
            manifest(&dir, g, "psro", &hashes, &outputs)
        }
        Command::EvalReward { domain: d, outcome, n } => {
            let d = domain(d)?;
            let outcomes: Vec<OutcomeTag> = if outcome == "all" {
                OutcomeTag::ALL.to_vec()
            } else {
                vec![outcome.parse::<OutcomeTag>().map_err(usage)?]
            };
            let bundle = backends(g, d)?;
            let oracle = GroundTruthReward::new(Arc::new(StubDebateJudge::new(bundle.classifier.clone())));
            let model: &dyn RewardModel = bundle.reward.as_ref();
            let parts = outcomes
                .iter()
                .map(|o| reward_error(model, &oracle, d, *o, *n, g.seed))
                .collect::<Result<Vec<_>, _>>()?;
            let report = RewardErrorReport::combine(&parts);
            let dir = out_dir(g)?;
            let csv = report.to_csv();
            let outputs = vec![write(&dir, "reward.csv", &csv)?];
            print!("{csv}");
            manifest(&dir, g, "eval-reward", &[], &outputs)
        }
        Command::EvalSteering { domain: d, n } => {
            let d = domain(d)?;
            let bundle = backends(g, d)?;
            let labels = steering_labels(d);
            let report =
                steering_accuracy(bundle.generator.as_ref(), bundle.classifier.as_ref(), d, &labels, *n, g.seed)?;
            let dir = out_dir(g)?;
            let csv = report.to_csv();
            let outputs = vec![write(&dir, "steering.csv", &csv)?];
            print!("{csv}");
            manifest(&dir, g, "eval-steering", &[], &outputs)
        }
        Command::Imitate { step: ImitateStep::BuildDataset { domain: d, games, cfr_iterations, dim } } => {
            if *dim < 8 {
                return Err(usage("--dim must be at least 8"));
            }
            let d = domain(d)?;
            let seeds: Vec<u64> = (0..*games as u64).map(|i| g.seed + i).collect();
            let (train_seeds, held_out) = split_games(&seeds, HELD_OUT_FRACTION);
            let embedder = HashingEmbedder::new(*dim);
            let examples = build_dataset_for_seeds(d, &train_seeds, *cfr_iterations, &backends(g, d)?, &embedder)?;
            let dir = out_dir(g)?;
            let mut buf = Vec::new();
            write_jsonl(&examples, &mut buf)?;
            let split = json!({ "domain": d.as_str(), "dim": dim, "train": train_seeds, "held_out": held_out });
            let outputs = vec![
                write(&dir, "dataset.jsonl", &String::from_utf8(buf).expect("json is utf-8"))?,
                write(&dir, "split.json", &serde_json::to_string_pretty(&split)?)?,
            ];
            println!("{} examples from {} games", examples.len(), train_seeds.len());
            manifest(&dir, g, "imitate build-dataset", &[], &outputs)
        }
        Command::Imitate { step: ImitateStep::Train { dataset, steps, batch, lr } } => {
            let file = std::fs::File::open(dataset).map_err(|e| usage(format!("{}: {e}", dataset.display())))?;
            let examples = read_jsonl(BufReader::new(file))?;
            let first = examples.first().ok_or_else(|| usage("dataset is empty"))?;
            let mut policy = MlpPolicy::<f64>::with_default_hidden(first.embedding.len(), first.target.len(), g.seed);
            let data: Vec<(Vec<f64>, Vec<f64>)> =
                examples.iter().map(|e| (e.embedding.clone(), e.target.clone())).collect();
            let config = TrainConfig { steps: *steps, batch_size: *batch, learning_rate: *lr, rng_seed: g.seed, ..TrainConfig::default() };
            let curve = train(&mut policy, &data, &config)?;
            let dir = out_dir(g)?;
            let outputs =
                vec![write(&dir, "model.json", &policy.to_json())?, write(&dir, "loss.csv", &loss_curve_csv(&curve))?];
            if let Some(last) = curve.last() {
                println!("final loss {} at step {}", last.loss, last.step);
            }
            manifest(&dir, g, "imitate train", &[], &outputs)
        }
        Command::MetaGame { domain: d, model, split, games, rollouts } => {
            let d = domain(d)?;
            let text = std::fs::read_to_string(model).map_err(|e| usage(format!("{}: {e}", model.display())))?;
            let policy = MlpPolicy::<f64>::from_json(&text)?;
            let seeds: Vec<u64> = match split {
                Some(path) => held_out_seeds(path)?,
                None => (0..*games as u64).map(|i| g.seed + i).collect(),
            };
            let configs = seeds.iter().map(|s| generate_config(d, *s)).collect::<Result<Vec<_>, _>>()?;
            let imitation = ImitationAgent {
                embedder: HashingEmbedder::new(policy.input_dim()),
                policy,
                sample_seed: g.seed,
            };
            let options: [&dyn AgentPolicy; 2] = [&imitation, &BaselineAgent];
            let result = meta_game_election(&configs, &options, &backends(g, d)?, *rollouts, ELECTION_RM_ITERATIONS)?;
            let mut csv = String::from("option,mass\n");
            for (name, mass) in result.options.iter().zip(&result.mass) {
                csv.push_str(&format!("{name},{mass}\n"));
            }
            let dir = out_dir(g)?;
            let outputs = vec![write(&dir, "election.csv", &csv)?, write(&dir, "election_tensor.csv", &result.tensor.to_csv())?];
            print!("{csv}");
            manifest(&dir, g, "meta-game", &[], &outputs)
        }
    }
}

fn held_out_seeds(path: &PathBuf) -> Result<Vec<u64>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let seeds: Vec<u64> = serde_json::from_value(value["held_out"].clone())?;
    if seeds.is_empty() {
        return Err(usage("the split has no held-out games"));
    }
    Ok(seeds)
}

//! Backend construction, file output and error classification.

use anyhow::anyhow;
use chatgames::backends::{
    BackendBundle, BackendError, GroundTruthReward, HttpClassifier, HttpClient, HttpConfig, HttpGenerator,
    HttpRewardModel, HttpTerminationJudge, ScriptedGenerator, StubProfile,
};
use chatgames::domains::debate::StubDebateJudge;
use chatgames::domains::{parse_domain, DomainError};
use chatgames::eval::EvalError;
use chatgames::game::{DomainId, GameConfig, GameError};
use chatgames::imitation::ImitationError;
use chatgames::nfg::NfgError;
use chatgames::psro::PsroError;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::{BackendKind, Failure, Global};

impl From<BackendError> for Failure {
    fn from(e: BackendError) -> Self {
        Failure::Backend(e.into())
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        match e {
            GameError::Backend(b) => Failure::Backend(b.into()),
            other => Failure::Other(other.into()),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Backend(b) => b.into(),
            EvalError::Game(g) => g.into(),
            other => Failure::Other(other.into()),
        }
    }
}

impl From<PsroError> for Failure {
    fn from(e: PsroError) -> Self {
        match e {
            PsroError::Game(g) => g.into(),
            other => Failure::Other(other.into()),
        }
    }
}

impl From<ImitationError> for Failure {
    fn from(e: ImitationError) -> Self {
        match e {
            ImitationError::Game(g) => g.into(),
            other => Failure::Other(other.into()),
        }
    }
}

impl From<DomainError> for Failure {
    fn from(e: DomainError) -> Self {
        Failure::Other(e.into())
    }
}

impl From<NfgError> for Failure {
    fn from(e: NfgError) -> Self {
        Failure::Other(e.into())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Other(e.into())
    }
}

pub fn usage(message: impl std::fmt::Display) -> Failure {
    Failure::Other(anyhow!("{message}"))
}

pub fn domain(name: &str) -> Result<DomainId, Failure> {
    Ok(parse_domain(name)?)
}

/// The config named by `--config`, if any.
pub fn load_config(global: &Global) -> Result<Option<GameConfig>, Failure> {
    match &global.config {
        None => Ok(None),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            Ok(Some(GameConfig::from_json(&text)?))
        }
    }
}

/// Backends for `domain` as selected by `--backend`.
pub fn backends(global: &Global, domain: DomainId) -> Result<BackendBundle, Failure> {
    if !(0.0..=1.0).contains(&global.follow_rate) {
        return Err(usage("--follow-rate must lie in [0, 1]"));
    }
    let stub = BackendBundle::stub(StubProfile::with_follow_rate(global.follow_rate));
    match global.backend {
        BackendKind::Stub => Ok(stub),
        BackendKind::Scripted => {
            let path = global.script.as_ref().ok_or_else(|| usage("--backend scripted needs --script <path>"))?;
            let (generator, classifier) = ScriptedGenerator::load(path)?;
            let classifier: Arc<dyn chatgames::backends::Classifier> = Arc::new(classifier);
            Ok(stub
                .with_generator(Arc::new(generator))
                .with_classifier(classifier.clone())
                .with_reward(Arc::new(GroundTruthReward::new(Arc::new(StubDebateJudge::new(classifier))))))
        }
        BackendKind::Http => {
            let client = Arc::new(HttpClient::new(HttpConfig::from_env()?));
            Ok(stub
                .with_generator(Arc::new(HttpGenerator::new(client.clone())))
                .with_classifier(Arc::new(HttpClassifier::for_domain(client.clone(), domain)))
                .with_terminator(Arc::new(HttpTerminationJudge::new(client.clone())))
                .with_reward(Arc::new(HttpRewardModel::new(client))))
        }
    }
}

pub fn out_dir(global: &Global) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(&global.out)
        .map_err(|e| usage(format!("cannot create {}: {e}", global.out.display())))?;
    Ok(global.out.clone())
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Records what produced the files under `dir`.
pub fn manifest(
    dir: &Path,
    global: &Global,
    command: &str,
    config_hashes: &[String],
    outputs: &[PathBuf],
) -> Result<(), Failure> {
    let files: Vec<String> =
        outputs.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect();
    let manifest = json!({
        "command": command,
        "backend": global.backend.as_str(),
        "seed": global.seed,
        "follow_rate": global.follow_rate,
        "config_hashes": config_hashes,
        "outputs": files,
        "version": env!("CARGO_PKG_VERSION"),
    });
    write(dir, "manifest.json", &serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

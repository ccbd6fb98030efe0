use serde::Deserialize;
use std::path::Path;

use super::{answer_to_distribution, hash64, BackendError, Classifier, GenerationRequest, Generator};

/// Replays recorded generations. The response for a request is chosen by hashing
/// `(prompt, seed)`, so replay does not depend on call order.
#[derive(Clone, Debug, Deserialize)]
pub struct ScriptedGenerator {
    responses: Vec<String>,
}

#[derive(Deserialize)]
struct ScriptFile {
    #[serde(default)]
    generate: Vec<String>,
    #[serde(default)]
    classify: Vec<String>,
}

impl ScriptedGenerator {
    pub fn new(responses: Vec<String>) -> Result<Self, BackendError> {
        if responses.is_empty() {
            return Err(BackendError::Config("scripted generator needs at least one response".into()));
        }
        Ok(ScriptedGenerator { responses })
    }

    /// Loads `{"generate": [...], "classify": [...]}` and returns both replayers.
    pub fn load(path: &Path) -> Result<(ScriptedGenerator, ScriptedClassifier), BackendError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::Config(format!("{}: {e}", path.display())))?;
        let script: ScriptFile = serde_json::from_str(&text)
            .map_err(|e| BackendError::Config(format!("{}: {e}", path.display())))?;
        let classify = if script.classify.is_empty() { vec![String::new()] } else { script.classify };
        Ok((ScriptedGenerator::new(script.generate)?, ScriptedClassifier::new(classify)))
    }
}

impl Generator for ScriptedGenerator {
    fn generate(&self, request: &GenerationRequest) -> Result<String, BackendError> {
        let h = hash64(&[request.prompt.as_bytes(), &request.seed.to_le_bytes()]);
        Ok(self.responses[(h % self.responses.len() as u64) as usize].clone())
    }
}

/// Replays recorded one-word classifier answers, chosen by hashing the message.
#[derive(Clone, Debug)]
pub struct ScriptedClassifier {
    answers: Vec<String>,
}

impl ScriptedClassifier {
    pub fn new(answers: Vec<String>) -> Self {
        ScriptedClassifier { answers }
    }
}

impl Classifier for ScriptedClassifier {
    fn classify(&self, message: &str, labels: &[String]) -> Result<Vec<f64>, BackendError> {
        if labels.is_empty() {
            return Err(BackendError::Config("classify needs at least one label".into()));
        }
        if self.answers.is_empty() {
            return Ok(crate::num::uniform(labels.len()));
        }
        let h = hash64(&[message.as_bytes()]);
        Ok(answer_to_distribution(&self.answers[(h % self.answers.len() as u64) as usize], labels))
    }
}

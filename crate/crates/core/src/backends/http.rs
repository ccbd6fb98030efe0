use serde::Deserialize;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use super::{
    answer_to_distribution, parse_utilities, BackendError, Classifier, GenerationRequest, Generator,
    RewardJudgment, RewardModel, TerminationJudge,
};
use crate::assets;
use crate::domains::debate::DebateJudge;
use crate::domains::patterns;
use crate::game::{canonical_private, render_thread, DialogueState, DomainId, GameConfig};

pub const ENDPOINT_ENV: &str = "GTLLM_ENDPOINT";
pub const TOKEN_ENV: &str = "GTLLM_TOKEN";

#[derive(Clone, Debug)]
pub struct HttpConfig {
    pub endpoint: String,
    pub token: Option<String>,
    pub timeout: Duration,
    pub max_attempts: u32,
    pub initial_backoff: Duration,
    pub max_in_flight: usize,
}

impl HttpConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        HttpConfig {
            endpoint: endpoint.into(),
            token: None,
            timeout: Duration::from_secs(60),
            max_attempts: 3,
            initial_backoff: Duration::from_millis(250),
            max_in_flight: 4,
        }
    }

    /// Endpoint from `GTLLM_ENDPOINT`, bearer token from `GTLLM_TOKEN`.
    pub fn from_env() -> Result<Self, BackendError> {
        let endpoint = std::env::var(ENDPOINT_ENV)
            .map_err(|_| BackendError::Config(format!("{ENDPOINT_ENV} is not set")))?;
        let mut config = HttpConfig::new(endpoint);
        config.token = std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty());
        Ok(config)
    }
}

#[derive(Deserialize)]
struct GenerationResponse {
    text: String,
}

/// Counting semaphore bounding in-flight requests.
struct Slots {
    free: Mutex<usize>,
    cond: Condvar,
}

impl Slots {
    fn acquire(&self) -> SlotGuard<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cond.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        SlotGuard(self)
    }
}

struct SlotGuard<'a>(&'a Slots);

impl Drop for SlotGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cond.notify_one();
    }
}

/// Blocking JSON client: `POST {prompt, seed, max_tokens}` → `{text}`.
pub struct HttpClient {
    config: HttpConfig,
    agent: ureq::Agent,
    slots: Slots,
}

impl HttpClient {
    pub fn new(config: HttpConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(true)
            .build()
            .into();
        let slots = Slots { free: Mutex::new(config.max_in_flight.max(1)), cond: Condvar::new() };
        HttpClient { config, agent, slots }
    }

    fn post_once(&self, request: &GenerationRequest) -> Result<String, String> {
        let _slot = self.slots.acquire();
        let mut call = self.agent.post(&self.config.endpoint);
        if let Some(token) = &self.config.token {
            call = call.header("Authorization", &format!("Bearer {token}"));
        }
        let mut response = call.send_json(request).map_err(|e| e.to_string())?;
        let body: GenerationResponse = response.body_mut().read_json().map_err(|e| e.to_string())?;
        Ok(body.text)
    }

    /// Posts with exponential backoff; fails after `max_attempts`.
    pub fn complete(&self, request: &GenerationRequest) -> Result<String, BackendError> {
        let mut backoff = self.config.initial_backoff;
        let mut last_error = String::new();
        for attempt in 0..self.config.max_attempts.max(1) {
            if attempt > 0 {
                std::thread::sleep(backoff);
                backoff *= 2;
            }
            match self.post_once(request) {
                Ok(text) => return Ok(text),
                Err(e) => last_error = e,
            }
        }
        Err(BackendError::Failure(format!(
            "{} after {} attempts: {last_error}",
            self.config.endpoint, self.config.max_attempts
        )))
    }

    fn ask(&self, prompt: String) -> Result<String, BackendError> {
        self.complete(&GenerationRequest::new(prompt, 0))
    }
}

pub struct HttpGenerator {
    client: std::sync::Arc<HttpClient>,
}

impl HttpGenerator {
    pub fn new(client: std::sync::Arc<HttpClient>) -> Self {
        HttpGenerator { client }
    }
}

impl Generator for HttpGenerator {
    fn generate(&self, request: &GenerationRequest) -> Result<String, BackendError> {
        self.client.complete(request)
    }
}

/// Wraps the domain's classifier instructions around the message and reads a one-word answer.
pub struct HttpClassifier {
    client: std::sync::Arc<HttpClient>,
    instructions: String,
}

impl HttpClassifier {
    pub fn new(client: std::sync::Arc<HttpClient>, instructions: impl Into<String>) -> Self {
        HttpClassifier { client, instructions: instructions.into() }
    }

    pub fn for_domain(client: std::sync::Arc<HttpClient>, domain: DomainId) -> Self {
        let instructions = match domain {
            DomainId::Debate => assets::CLASSIFIER_DEBATE,
            DomainId::Fruit => assets::CLASSIFIER_FRUIT,
            DomainId::Meeting => assets::CLASSIFIER_MEETING,
        };
        HttpClassifier::new(client, instructions)
    }

    pub fn prompt(&self, message: &str) -> String {
        format!("{}{}\n\nAnswer:", self.instructions, message.trim())
    }
}

impl Classifier for HttpClassifier {
    fn classify(&self, message: &str, labels: &[String]) -> Result<Vec<f64>, BackendError> {
        if labels.is_empty() {
            return Err(BackendError::Config("classify needs at least one label".into()));
        }
        let answer = self.client.ask(self.prompt(message))?;
        Ok(answer_to_distribution(&answer, labels))
    }
}

pub struct HttpTerminationJudge {
    client: std::sync::Arc<HttpClient>,
    prompt: String,
}

impl HttpTerminationJudge {
    pub fn new(client: std::sync::Arc<HttpClient>) -> Self {
        HttpTerminationJudge { client, prompt: assets::TERMINATOR.to_owned() }
    }
}

impl TerminationJudge for HttpTerminationJudge {
    fn judge_terminal(&self, config: &GameConfig, thread: &DialogueState) -> Result<bool, BackendError> {
        if thread.replies().next().is_none() {
            return Ok(false);
        }
        let answer = self
            .client
            .ask(format!("{}{}\nAnswer:", self.prompt, render_thread(config, thread)))?;
        let word = answer.trim().split_whitespace().next().unwrap_or("").to_lowercase();
        Ok(word.starts_with("yes") || word.starts_with("true"))
    }
}

fn private_summary(config: &GameConfig) -> String {
    config
        .player_names
        .iter()
        .enumerate()
        .map(|(i, name)| format!("Player {i} ({name}): {}\n", canonical_private(&config.scenario.private_info[i])))
        .collect()
}

/// Reward model prompted with the domain's reward instructions, both players' private
/// information and the transcript. Unreadable answers score zero and are tagged incomplete.
pub struct HttpRewardModel {
    client: std::sync::Arc<HttpClient>,
}

impl HttpRewardModel {
    pub fn new(client: std::sync::Arc<HttpClient>) -> Self {
        HttpRewardModel { client }
    }

    pub fn prompt(config: &GameConfig, transcript: &DialogueState) -> String {
        let instructions = match config.domain_id {
            DomainId::Fruit => assets::REWARD_FRUIT,
            DomainId::Meeting => assets::REWARD_MEETING,
            DomainId::Debate => assets::REWARD_DEBATE,
        };
        format!("{instructions}{}\n{}", private_summary(config), render_thread(config, transcript))
    }
}

impl RewardModel for HttpRewardModel {
    fn score(&self, config: &GameConfig, transcript: &DialogueState) -> Result<RewardJudgment, BackendError> {
        let answer = self.client.ask(HttpRewardModel::prompt(config, transcript))?;
        let tag = patterns::outcome_of(transcript);
        Ok(match parse_utilities(&answer, config.num_players) {
            Some(values) => RewardJudgment { values, outcome_tag: tag, rationale: Some(answer) },
            None => RewardJudgment {
                rationale: Some(answer),
                ..RewardJudgment::zero(config.num_players, super::OutcomeTag::Incomplete)
            },
        })
    }
}

/// Asks the model to score the debate; the player with the higher stated utility wins,
/// ties going to player 0.
pub struct HttpDebateJudge {
    client: std::sync::Arc<HttpClient>,
}

impl HttpDebateJudge {
    pub fn new(client: std::sync::Arc<HttpClient>) -> Self {
        HttpDebateJudge { client }
    }
}

impl DebateJudge for HttpDebateJudge {
    fn winner(&self, config: &GameConfig, transcript: &DialogueState) -> Result<usize, BackendError> {
        let answer = self.client.ask(HttpRewardModel::prompt(config, transcript))?;
        let values = parse_utilities(&answer, config.num_players)
            .ok_or_else(|| BackendError::Failure(format!("unreadable debate verdict: {answer}")))?;
        Ok(if values[1] > values[0] { 1 } else { 0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::Arc;

    /// Serves the given `(status, body)` pairs in order, one per connection.
    fn serve(responses: Vec<(u16, String)>) -> (String, std::thread::JoinHandle<Vec<String>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/generate", listener.local_addr().unwrap());
        let handle = std::thread::spawn(move || {
            let mut bodies = Vec::new();
            for (status, body) in responses {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut length = 0usize;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                    let lower = line.to_ascii_lowercase();
                    if let Some(v) = lower.strip_prefix("content-length:") {
                        length = v.trim().parse().unwrap();
                    }
                }
                let mut buf = vec![0u8; length];
                reader.read_exact(&mut buf).unwrap();
                bodies.push(String::from_utf8(buf).unwrap());
                let mut stream = stream;
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
            }
            bodies
        });
        (url, handle)
    }

    fn fast_client(url: String) -> Arc<HttpClient> {
        let mut config = HttpConfig::new(url);
        config.initial_backoff = Duration::from_millis(1);
        config.timeout = Duration::from_secs(5);
        Arc::new(HttpClient::new(config))
    }

    #[test]
    fn retries_then_succeeds() {
        let (url, server) = serve(vec![
            (500, "{}".into()),
            (200, r#"{"text":"hello"}"#.into()),
        ]);
        let client = fast_client(url);
        let text = HttpGenerator::new(client).generate(&GenerationRequest::new("p", 1)).unwrap();
        assert_eq!(text, "hello");
        let bodies = server.join().unwrap();
        let sent: serde_json::Value = serde_json::from_str(&bodies[1]).unwrap();
        assert_eq!(sent, serde_json::json!({"prompt": "p", "seed": 1, "max_tokens": 256}));
    }

    #[test]
    fn fails_after_three_attempts() {
        let (url, server) = serve(vec![(503, "{}".into()), (503, "{}".into()), (503, "{}".into())]);
        let err = HttpGenerator::new(fast_client(url))
            .generate(&GenerationRequest::new("p", 0))
            .unwrap_err();
        assert!(matches!(err, BackendError::Failure(_)));
        assert_eq!(server.join().unwrap().len(), 3);
    }

    #[test]
    fn classifier_wraps_instructions_and_reads_answer() {
        let (url, server) = serve(vec![(200, r#"{"text":"ethos"}"#.into())]);
        let classifier = HttpClassifier::for_domain(fast_client(url), DomainId::Debate);
        let labels: Vec<String> = ["logos", "ethos", "pathos"].iter().map(|s| s.to_string()).collect();
        let message = "I am a dentist and my advice is that Colgate is the best toothpaste for your teeth.";
        let p = classifier.classify(message, &labels).unwrap();
        assert_eq!(p, vec![0.0, 1.0, 0.0]);
        let bodies = server.join().unwrap();
        let sent: serde_json::Value = serde_json::from_str(&bodies[0]).unwrap();
        let prompt = sent["prompt"].as_str().unwrap();
        assert!(prompt.starts_with(assets::CLASSIFIER_DEBATE));
        assert!(prompt.contains(message));
    }

    #[test]
    fn missing_endpoint_env_is_a_config_error() {
        if std::env::var(ENDPOINT_ENV).is_err() {
            assert!(matches!(HttpConfig::from_env(), Err(BackendError::Config(_))));
        }
    }
}

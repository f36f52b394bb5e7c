//! Text-generation endpoints: a live HTTP client, a deterministic stub and
//! a replayer for recorded logs.

use std::collections::{HashMap, VecDeque};
use std::path::Path;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::log::{GenerationLog, LogRecord};
use super::GenerationError;

pub const ENDPOINT_ENV: &str = "AFFORDNET_ENDPOINT";
pub const API_KEY_ENV: &str = "AFFORDNET_API_KEY";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextGenRequest {
    pub prompt: String,
    pub model_id: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TextGenResponse {
    pub completions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ClientError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("endpoint returned status {0}")]
    Status(u16),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("no fixture rule matches prompt {0:?}")]
    Unmatched(String),
    #[error("{0}")]
    Scripted(String),
}

/// A text-generation backend. Each call is one request; retries and rate
/// limiting are the caller's business.
pub trait TextGenerator {
    fn generate(&mut self, request: &TextGenRequest) -> Result<TextGenResponse, ClientError>;
}

impl<T: TextGenerator + ?Sized> TextGenerator for &mut T {
    fn generate(&mut self, request: &TextGenRequest) -> Result<TextGenResponse, ClientError> {
        (**self).generate(request)
    }
}

/// What the stub does with a prompt that matches no rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unmatched {
    #[default]
    Error,
    Default,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StubRule {
    /// Regular expression searched for in the prompt.
    pub pattern: String,
    #[serde(default)]
    pub responses: Vec<String>,
    /// When set, every matching request fails with this message.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Stub fixture file: rules are tried in order, the first match answers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StubFixture {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub unmatched: Unmatched,
    #[serde(default)]
    pub default_response: Option<String>,
    pub rules: Vec<StubRule>,
}

/// Deterministic client answering from a [`StubFixture`].
///
/// Each rule cycles through its responses starting at an offset drawn from
/// the fixture seed, so a run is a pure function of fixture and prompts.
#[derive(Debug)]
pub struct StubClient {
    rules: Vec<(Regex, StubRule)>,
    cursors: Vec<usize>,
    unmatched: Unmatched,
    default_response: Option<String>,
}

impl StubClient {
    pub fn new(fixture: StubFixture) -> Result<Self, GenerationError> {
        if fixture.unmatched == Unmatched::Default && fixture.default_response.is_none() {
            return Err(GenerationError::Config(
                "stub fixture: unmatched = \"default\" needs default_response".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(fixture.seed);
        let mut rules = Vec::with_capacity(fixture.rules.len());
        let mut cursors = Vec::with_capacity(fixture.rules.len());
        for rule in fixture.rules {
            let re = Regex::new(&rule.pattern).map_err(|e| {
                GenerationError::Config(format!("stub pattern {:?}: {e}", rule.pattern))
            })?;
            if rule.responses.is_empty() && rule.error.is_none() {
                return Err(GenerationError::Config(format!(
                    "stub rule {:?} has neither responses nor error",
                    rule.pattern
                )));
            }
            cursors.push(match rule.responses.len() {
                0 => 0,
                n => rng.random_range(0..n),
            });
            rules.push((re, rule));
        }
        Ok(StubClient {
            rules,
            cursors,
            unmatched: fixture.unmatched,
            default_response: fixture.default_response,
        })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, GenerationError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| GenerationError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let fixture: StubFixture = serde_json::from_str(&text).map_err(|e| {
            GenerationError::Config(format!("stub fixture {}: {e}", path.display()))
        })?;
        StubClient::new(fixture)
    }
}

impl TextGenerator for StubClient {
    fn generate(&mut self, request: &TextGenRequest) -> Result<TextGenResponse, ClientError> {
        let hit = self
            .rules
            .iter()
            .position(|(re, _)| re.is_match(&request.prompt));
        let Some(i) = hit else {
            return match (self.unmatched, &self.default_response) {
                (Unmatched::Default, Some(r)) => Ok(single(r.clone())),
                _ => Err(ClientError::Unmatched(request.prompt.clone())),
            };
        };
        let rule = &self.rules[i].1;
        if let Some(msg) = &rule.error {
            return Err(ClientError::Scripted(msg.clone()));
        }
        let text = rule.responses[self.cursors[i]].clone();
        self.cursors[i] = (self.cursors[i] + 1) % rule.responses.len();
        Ok(single(text))
    }
}

fn single(text: String) -> TextGenResponse {
    TextGenResponse {
        completions: vec![text],
        usage: None,
    }
}

/// Answers each prompt with the responses recorded for it in a log, in the
/// order they were recorded. Recorded attempt counts are reproduced: a
/// prompt that took three attempts fails twice before it answers, and a
/// failed prompt fails as many times as it was tried.
#[derive(Debug, Default)]
pub struct ReplayClient {
    queue: HashMap<String, VecDeque<Replayed>>,
}

#[derive(Debug)]
struct Replayed {
    outcome: Result<Vec<String>, String>,
    failures_left: u32,
}

const TRANSIENT: &str = "replayed transient failure";

impl ReplayClient {
    pub fn new(log: &GenerationLog) -> Self {
        let mut queue: HashMap<String, VecDeque<Replayed>> = HashMap::new();
        for record in &log.records {
            if let LogRecord::Request(r) = record {
                let (outcome, failures_left) = match &r.error {
                    Some(e) => (Err(e.clone()), r.attempts.max(1)),
                    None => (Ok(r.responses.clone()), r.attempts.saturating_sub(1)),
                };
                queue
                    .entry(r.prompt.clone())
                    .or_default()
                    .push_back(Replayed {
                        outcome,
                        failures_left,
                    });
            }
        }
        ReplayClient { queue }
    }
}

impl TextGenerator for ReplayClient {
    fn generate(&mut self, request: &TextGenRequest) -> Result<TextGenResponse, ClientError> {
        let Some(q) = self.queue.get_mut(&request.prompt) else {
            return Err(ClientError::Unmatched(request.prompt.clone()));
        };
        let Some(front) = q.front_mut() else {
            return Err(ClientError::Unmatched(request.prompt.clone()));
        };
        if front.failures_left > 0 {
            front.failures_left -= 1;
            let msg = match &front.outcome {
                Err(e) => e.clone(),
                Ok(_) => TRANSIENT.to_string(),
            };
            if front.failures_left == 0 && front.outcome.is_err() {
                q.pop_front();
            }
            return Err(ClientError::Scripted(msg));
        }
        let front = q.pop_front().expect("front exists");
        match front.outcome {
            Ok(completions) => Ok(TextGenResponse {
                completions,
                usage: None,
            }),
            Err(e) => Err(ClientError::Scripted(e)),
        }
    }
}

/// Chat-completion style HTTP client.
///
/// Sends `{"model", "messages": [{"role": "user", "content"}]}` to the
/// endpoint with a bearer token and reads `choices[].message.content`.
pub struct HttpClient {
    agent: ureq::Agent,
    endpoint: String,
    api_key: String,
}

impl std::fmt::Debug for HttpClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpClient")
            .field("endpoint", &self.endpoint)
            .finish_non_exhaustive()
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
    #[serde(default)]
    usage: Option<serde_json::Value>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatReply,
}

#[derive(Deserialize)]
struct ChatReply {
    content: Option<String>,
}

impl HttpClient {
    pub fn new(endpoint: impl Into<String>, api_key: impl Into<String>, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpClient {
            agent,
            endpoint: endpoint.into(),
            api_key: api_key.into(),
        }
    }

    /// Reads the endpoint and key from the environment.
    pub fn from_env(timeout: Duration) -> Result<Self, GenerationError> {
        let var = |name: &'static str| match std::env::var(name) {
            Ok(v) if !v.trim().is_empty() => Ok(v),
            _ => Err(GenerationError::MissingEnv(name)),
        };
        let endpoint = var(ENDPOINT_ENV)?;
        let key = var(API_KEY_ENV)?;
        Ok(HttpClient::new(endpoint, key, timeout))
    }
}

impl TextGenerator for HttpClient {
    fn generate(&mut self, request: &TextGenRequest) -> Result<TextGenResponse, ClientError> {
        let body = ChatRequest {
            model: &request.model_id,
            messages: [ChatMessage {
                role: "user",
                content: &request.prompt,
            }],
        };
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(&body)
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        if !(200..300).contains(&status) {
            return Err(ClientError::Status(status));
        }
        let parsed: ChatResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| ClientError::Malformed(e.to_string()))?;
        let completions: Vec<String> = parsed
            .choices
            .into_iter()
            .filter_map(|c| c.message.content)
            .collect();
        if completions.is_empty() {
            return Err(ClientError::Malformed("no completions".into()));
        }
        Ok(TextGenResponse {
            completions,
            usage: parsed.usage,
        })
    }
}

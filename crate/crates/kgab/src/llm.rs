//! Answer-generation boundary: prompt construction, a remote HTTP adapter,
//! and a deterministic mock oracle for analytic test runs.
//!
//! Every generator sits behind the [`Generator`] trait. The HTTP adapter
//! speaks the common chat-completion JSON schema (configurable base URL,
//! model name, bearer token from `KGAB_LLM_API_KEY`), retries transient
//! failures with exponential backoff, and respects a requests-per-minute
//! budget. The mock oracle answers correctly exactly when the evidence text
//! contains an answer-entity label, which makes end-to-end accuracy a pure
//! function of retrieval success.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::io::Write as _;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::data::Question;
use crate::error::{Error, Result};
use crate::metrics::AnswerSet;
use crate::retrieve::RetrievalResult;

/// Environment variables consulted by [`HttpConfig::from_env`].
pub const ENV_BASE_URL: &str = "KGAB_LLM_BASE_URL";
pub const ENV_MODEL: &str = "KGAB_LLM_MODEL";
pub const ENV_API_KEY: &str = "KGAB_LLM_API_KEY";

const SYSTEM_PROMPT: &str = "You are a question answering assistant. Answer using only the \
provided evidence. If the evidence does not contain the answer, reply with \"unknown\".";

/// Marker placed in the prompt when retrieval produced nothing.
pub const NO_EVIDENCE_MARKER: &str = "No evidence.";

/// One generation request. Temperature stays at 0 for every harness run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenRequest {
    pub system_text: String,
    pub user_text: String,
    pub max_tokens: u32,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenResponse {
    pub output_text: String,
    pub token_usage: Option<TokenUsage>,
    pub latency_ms: u64,
}

/// Anything that can turn a prompt into text.
pub trait Generator: Send + Sync {
    fn generate(&self, request: &GenRequest) -> Result<GenResponse>;

    /// Short label for reports ("mock", "http").
    fn label(&self) -> &'static str;
}

/// Fixed prompt template: evidence block, blank line, question line.
/// Byte-stable for fixed inputs.
pub fn build_prompt(question: &Question, retrieval: &RetrievalResult) -> GenRequest {
    let evidence = if retrieval.evidence_text.is_empty() {
        NO_EVIDENCE_MARKER
    } else {
        &retrieval.evidence_text
    };
    GenRequest {
        system_text: SYSTEM_PROMPT.to_string(),
        user_text: format!("{evidence}\n\nQuestion: {}", question.text),
        max_tokens: 256,
        temperature: 0.0,
    }
}

fn check_request(request: &GenRequest) -> Result<()> {
    if request.system_text.is_empty() || request.user_text.is_empty() {
        return Err(Error::input("generation request texts must be non-empty"));
    }
    Ok(())
}

// -- mock oracle ----------------------------------------------------------------

/// Deterministic stand-in for an LLM: it reads the entity labels out of the
/// evidence block and emits the comma-separated labels of every answer entity
/// present there, or exactly "unknown".
///
/// The oracle knows the gold answers (keyed by question text), simulating a
/// perfectly knowledgeable reader of evidence. It belongs in test and
/// synthetic runs only and is labeled as such in reports.
pub struct MockOracle {
    answers_by_question: HashMap<String, AnswerSet>,
}

impl MockOracle {
    pub fn from_questions(questions: &[Question]) -> Self {
        MockOracle {
            answers_by_question: questions
                .iter()
                .map(|q| (q.text.clone(), q.answers.clone()))
                .collect(),
        }
    }
}

/// Splits a prompt built by [`build_prompt`] back into evidence and question.
fn split_prompt(user_text: &str) -> Option<(&str, &str)> {
    let marker = "\n\nQuestion: ";
    let at = user_text.rfind(marker)?;
    Some((&user_text[..at], &user_text[at + marker.len()..]))
}

/// Entity labels appearing in template lines `head --relation--> tail`.
fn evidence_entities(evidence: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for line in evidence.lines() {
        let Some(i) = line.find(" --") else { continue };
        let Some(j) = line.rfind("--> ") else { continue };
        if j + 4 <= line.len() && i < j {
            out.push(&line[..i]);
            out.push(&line[j + 4..]);
        }
    }
    out
}

impl Generator for MockOracle {
    fn generate(&self, request: &GenRequest) -> Result<GenResponse> {
        check_request(request)?;
        let (evidence, question) = split_prompt(&request.user_text).ok_or_else(|| {
            Error::input("mock oracle expects the fixed prompt template")
        })?;
        let answers = self.answers_by_question.get(question).ok_or_else(|| {
            Error::input(format!("mock oracle has no answers for question {question:?}"))
        })?;
        let entities: std::collections::HashSet<&str> =
            evidence_entities(evidence).into_iter().collect();
        let found: Vec<&str> = answers
            .iter()
            .filter(|a| a.surface_forms().any(|form| entities.contains(form)))
            .map(|a| a.label.as_str())
            .collect();
        let output_text = if found.is_empty() {
            "unknown".to_string()
        } else {
            found.join(", ")
        };
        Ok(GenResponse {
            output_text,
            token_usage: None,
            latency_ms: 0,
        })
    }

    fn label(&self) -> &'static str {
        "mock"
    }
}

// -- rate limiting ----------------------------------------------------------------

/// Sliding-window request budget shared by all workers.
pub struct RateLimiter {
    capacity: usize,
    window: Duration,
    stamps: Mutex<VecDeque<Instant>>,
}

impl RateLimiter {
    pub fn per_minute(requests: u32) -> Self {
        RateLimiter::new(requests.max(1) as usize, Duration::from_secs(60))
    }

    pub fn new(capacity: usize, window: Duration) -> Self {
        RateLimiter {
            capacity: capacity.max(1),
            window,
            stamps: Mutex::new(VecDeque::new()),
        }
    }

    /// Blocks until a slot in the window frees up.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut stamps = self.stamps.lock().expect("limiter lock");
                let now = Instant::now();
                while stamps
                    .front()
                    .is_some_and(|&t| now.duration_since(t) >= self.window)
                {
                    stamps.pop_front();
                }
                if stamps.len() < self.capacity {
                    stamps.push_back(now);
                    return;
                }
                self.window - now.duration_since(*stamps.front().expect("non-empty"))
            };
            std::thread::sleep(wait.min(Duration::from_millis(50)));
        }
    }
}

// -- transcript ----------------------------------------------------------------

/// One transcript line: request, outcome, wall-clock timestamp.
#[derive(Debug, Serialize)]
pub struct TranscriptRecord<'a> {
    pub timestamp_ms: u128,
    pub question_id: &'a str,
    pub request: &'a GenRequest,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub response: Option<&'a GenResponse>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Append-only JSON-lines log of every generation call.
pub struct TranscriptLogger {
    file: Mutex<std::fs::File>,
}

impl TranscriptLogger {
    pub fn create(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Ok(TranscriptLogger {
            file: Mutex::new(std::fs::File::create(path)?),
        })
    }

    pub fn log(&self, record: &TranscriptRecord<'_>) -> Result<()> {
        let line = serde_json::to_string(record)
            .map_err(|e| Error::input(format!("transcript serialize: {e}")))?;
        let mut file = self.file.lock().expect("transcript lock");
        writeln!(file, "{line}")?;
        Ok(())
    }
}

// -- HTTP adapter ----------------------------------------------------------------

/// Remote endpoint configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HttpConfig {
    pub base_url: String,
    pub model: String,
    /// Bearer token; usually injected from `KGAB_LLM_API_KEY`.
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
    pub max_retries: u32,
    pub initial_backoff_ms: u64,
    pub requests_per_minute: u32,
    pub timeout_ms: u64,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            base_url: String::new(),
            model: String::new(),
            api_key: None,
            max_retries: 5,
            initial_backoff_ms: 500,
            requests_per_minute: 60,
            timeout_ms: 30_000,
        }
    }
}

impl HttpConfig {
    /// Reads endpoint, model, and key from the environment.
    pub fn from_env() -> Result<Self> {
        let base_url = std::env::var(ENV_BASE_URL)
            .map_err(|_| Error::config(format!("{ENV_BASE_URL} is not set")))?;
        let model = std::env::var(ENV_MODEL)
            .map_err(|_| Error::config(format!("{ENV_MODEL} is not set")))?;
        Ok(HttpConfig {
            base_url,
            model,
            api_key: std::env::var(ENV_API_KEY).ok(),
            ..HttpConfig::default()
        })
    }
}

/// Chat-completion client with retry, backoff, and rate limiting.
pub struct HttpGenerator {
    config: HttpConfig,
    agent: ureq::Agent,
    limiter: RateLimiter,
}

impl HttpGenerator {
    pub fn new(config: HttpConfig) -> Result<Self> {
        if config.base_url.is_empty() {
            return Err(Error::config("http generator requires a base URL"));
        }
        if config.model.is_empty() {
            return Err(Error::config("http generator requires a model name"));
        }
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build();
        let limiter = RateLimiter::per_minute(config.requests_per_minute);
        Ok(HttpGenerator {
            config,
            agent,
            limiter,
        })
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn attempt(&self, request: &GenRequest) -> std::result::Result<GenResponse, AttemptError> {
        let body = serde_json::json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": request.system_text},
                {"role": "user", "content": request.user_text},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        });
        let mut call = self.agent.post(&self.endpoint());
        if let Some(key) = &self.config.api_key {
            call = call.set("Authorization", &format!("Bearer {key}"));
        }
        let started = Instant::now();
        let response = call.send_json(body).map_err(|err| match err {
            ureq::Error::Status(code, _) => AttemptError {
                message: format!("endpoint replied with status {code}"),
                status: Some(code),
                retryable: code == 429 || code >= 500,
            },
            ureq::Error::Transport(t) => AttemptError {
                message: format!("transport failure: {t}"),
                status: None,
                retryable: true,
            },
        })?;
        let latency_ms = started.elapsed().as_millis() as u64;
        let value: serde_json::Value = response.into_json().map_err(|e| AttemptError {
            message: format!("reply is not JSON: {e}"),
            status: None,
            retryable: false,
        })?;
        let output_text = value["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| AttemptError {
                message: "reply lacks choices[0].message.content".to_string(),
                status: None,
                retryable: false,
            })?
            .to_string();
        let token_usage = match (
            value["usage"]["prompt_tokens"].as_u64(),
            value["usage"]["completion_tokens"].as_u64(),
        ) {
            (Some(p), Some(c)) => Some(TokenUsage {
                prompt_tokens: p,
                completion_tokens: c,
            }),
            _ => None,
        };
        Ok(GenResponse {
            output_text,
            token_usage,
            latency_ms,
        })
    }
}

struct AttemptError {
    message: String,
    status: Option<u16>,
    retryable: bool,
}

impl Generator for HttpGenerator {
    fn generate(&self, request: &GenRequest) -> Result<GenResponse> {
        check_request(request)?;
        let mut backoff = Duration::from_millis(self.config.initial_backoff_ms.max(1));
        let mut last: Option<AttemptError> = None;
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                std::thread::sleep(backoff);
                backoff = backoff.saturating_mul(2);
            }
            self.limiter.acquire();
            match self.attempt(request) {
                Ok(response) => return Ok(response),
                Err(err) if err.retryable => last = Some(err),
                Err(err) if err.status.is_some() => {
                    return Err(Error::Transport {
                        message: err.message,
                        status: err.status,
                    })
                }
                Err(err) => return Err(Error::Protocol(err.message)),
            }
        }
        let err = last.expect("at least one attempt");
        Err(Error::Transport {
            message: format!(
                "{} (gave up after {} retries)",
                err.message, self.config.max_retries
            ),
            status: err.status,
        })
    }

    fn label(&self) -> &'static str {
        "http"
    }
}

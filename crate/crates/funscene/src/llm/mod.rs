//! Transport and template layer for model calls, with deterministic
//! record/replay so the whole engine tests offline.
//!
//! The client renders a template, sends it through a backend (HTTP
//! chat-completions endpoint, a cassette in replay mode, or any custom
//! [`Backend`]), and parses the structured block out of the reply, retrying
//! on parse failure up to the configured budget.

mod cassette;
mod doc;
mod template;

pub use cassette::{cassette_key, Cassette, CassetteError, CassetteRecord};
pub use doc::{parse_structured_block, DocError, DocNode};
pub use template::{
    arrangement_template, layout_plan_template, requirement_template, task_parse_template,
    PromptTemplate, TemplateError, ARRANGEMENT_OBJECTS_SUFFIX,
};

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Condvar, Mutex};

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("no parseable structured block after {attempts} attempt(s): {last}")]
    ParseFailure { attempts: u32, last: DocError },
    #[error("replay cassette has no record for template '{template_id}' (key {key})")]
    CassetteMiss { template_id: String, key: String },
    #[error(transparent)]
    Cassette(#[from] CassetteError),
}

/// One rendered call, ready for a backend.
#[derive(Debug, Clone)]
pub struct ChatRequest {
    pub template_id: String,
    pub bindings: BTreeMap<String, String>,
    pub rendered: String,
}

/// Anything that can answer a rendered prompt with raw text.
pub trait Backend: Send + Sync {
    fn send(&self, request: &ChatRequest) -> Result<String, LlmError>;
}

/// Chat-completions-style HTTP backend. Endpoint, model name, and key come
/// from configuration; decoding defaults to temperature 0 for
/// reproducibility.
pub struct HttpBackend {
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    pub temperature: f64,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(endpoint: String, model: String, api_key: Option<String>, temperature: f64) -> Self {
        HttpBackend {
            endpoint,
            model,
            api_key,
            temperature,
            client: reqwest::blocking::Client::new(),
        }
    }
}

#[derive(Deserialize)]
struct ChatCompletion {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

impl Backend for HttpBackend {
    fn send(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let body = serde_json::json!({
            "model": self.model,
            "messages": [{"role": "user", "content": request.rendered}],
            "temperature": self.temperature,
        });
        let mut call = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            call = call.bearer_auth(key);
        }
        let response = call
            .send()
            .map_err(|e| LlmError::Transport(e.to_string()))?
            .error_for_status()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        let completion: ChatCompletion = response
            .json()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        completion
            .choices
            .first()
            .map(|c| c.message.content.clone())
            .ok_or_else(|| LlmError::Transport("empty choices in completion".to_string()))
    }
}

/// Counting semaphore capping in-flight backend calls.
struct Semaphore {
    permits: Mutex<usize>,
    available: Condvar,
}

impl Semaphore {
    fn new(permits: usize) -> Self {
        Semaphore {
            permits: Mutex::new(permits.max(1)),
            available: Condvar::new(),
        }
    }

    fn acquire(&self) -> SemaphoreGuard<'_> {
        let mut permits = self.permits.lock().unwrap();
        while *permits == 0 {
            permits = self.available.wait(permits).unwrap();
        }
        *permits -= 1;
        SemaphoreGuard { semaphore: self }
    }
}

struct SemaphoreGuard<'a> {
    semaphore: &'a Semaphore,
}

impl Drop for SemaphoreGuard<'_> {
    fn drop(&mut self) {
        let mut permits = self.semaphore.permits.lock().unwrap();
        *permits += 1;
        self.semaphore.available.notify_one();
    }
}

enum Mode {
    /// Read-only cassette lookups; fully deterministic.
    Replay(Cassette),
    /// Live backend calls.
    Live(Box<dyn Backend>),
    /// Live calls that also append to a cassette on disk.
    Record {
        backend: Box<dyn Backend>,
        cassette: Mutex<Cassette>,
        path: PathBuf,
    },
}

/// Raw model reply plus its parsed structured block.
#[derive(Debug, Clone)]
pub struct LlmResponse {
    pub raw_text: String,
    pub parsed: DocNode,
}

pub struct LlmClient {
    mode: Mode,
    /// Maximum attempts per call, including the first.
    budget: u32,
    inflight: Semaphore,
}

impl LlmClient {
    pub fn replay(cassette: Cassette) -> Self {
        LlmClient {
            mode: Mode::Replay(cassette),
            budget: 1,
            inflight: Semaphore::new(usize::MAX >> 1),
        }
    }

    pub fn live(backend: Box<dyn Backend>, budget: u32, max_inflight: usize) -> Self {
        LlmClient {
            mode: Mode::Live(backend),
            budget: budget.max(1),
            inflight: Semaphore::new(max_inflight),
        }
    }

    /// Live calls recorded into the cassette at `path`; the file is written
    /// after every successful call.
    pub fn recording(
        backend: Box<dyn Backend>,
        path: PathBuf,
        budget: u32,
        max_inflight: usize,
    ) -> Result<Self, LlmError> {
        let cassette = if path.exists() {
            Cassette::load(&path)?
        } else {
            Cassette::new()
        };
        Ok(LlmClient {
            mode: Mode::Record {
                backend,
                cassette: Mutex::new(cassette),
                path,
            },
            budget: budget.max(1),
            inflight: Semaphore::new(max_inflight),
        })
    }

    /// Renders the template, obtains a reply, and returns the first response
    /// whose structured block parses; retries up to the budget on parse
    /// failure. In replay mode a parse failure is final since the recorded
    /// reply cannot change.
    pub fn complete(
        &self,
        template: &PromptTemplate,
        bindings: &BTreeMap<String, String>,
    ) -> Result<LlmResponse, LlmError> {
        let rendered = template.render(bindings)?;
        let request = ChatRequest {
            template_id: template.template_id.clone(),
            bindings: bindings.clone(),
            rendered,
        };
        let key = cassette_key(&request.template_id, &request.bindings);

        let mut last = DocError::NoBlock;
        let attempts = match &self.mode {
            Mode::Replay(_) => 1,
            _ => self.budget,
        };
        for attempt in 1..=attempts {
            let raw = self.fetch(&request, &key)?;
            match parse_structured_block(&raw) {
                Ok(parsed) => {
                    self.record(&request, &key, &raw)?;
                    return Ok(LlmResponse {
                        raw_text: raw,
                        parsed,
                    });
                }
                Err(err) => {
                    log::debug!(
                        "attempt {attempt}/{attempts} for '{}' failed to parse: {err}",
                        request.template_id
                    );
                    last = err;
                }
            }
        }
        Err(LlmError::ParseFailure { attempts, last })
    }

    fn fetch(&self, request: &ChatRequest, key: &str) -> Result<String, LlmError> {
        match &self.mode {
            Mode::Replay(cassette) => {
                cassette
                    .get(key)
                    .map(|r| r.response.clone())
                    .ok_or_else(|| LlmError::CassetteMiss {
                        template_id: request.template_id.clone(),
                        key: key.to_string(),
                    })
            }
            Mode::Live(backend) => {
                let _permit = self.inflight.acquire();
                backend.send(request)
            }
            Mode::Record { backend, .. } => {
                let _permit = self.inflight.acquire();
                backend.send(request)
            }
        }
    }

    fn record(&self, request: &ChatRequest, key: &str, raw: &str) -> Result<(), LlmError> {
        if let Mode::Record { cassette, path, .. } = &self.mode {
            let mut cassette = cassette.lock().unwrap();
            cassette.insert(CassetteRecord {
                key: key.to_string(),
                template_id: request.template_id.clone(),
                bindings: request.bindings.clone(),
                response: raw.to_string(),
            });
            cassette.save(path)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU32, Ordering};

    struct QueueBackend {
        replies: Vec<String>,
        calls: AtomicU32,
    }

    impl Backend for QueueBackend {
        fn send(&self, _request: &ChatRequest) -> Result<String, LlmError> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst) as usize;
            Ok(self
                .replies
                .get(n.min(self.replies.len() - 1))
                .cloned()
                .unwrap())
        }
    }

    fn prompt_bindings(text: &str) -> BTreeMap<String, String> {
        let mut bindings = BTreeMap::new();
        bindings.insert("prompt".to_string(), text.to_string());
        bindings
    }

    #[test]
    fn replay_returns_recorded_response_verbatim() {
        let bindings = prompt_bindings("Open the bedroom door");
        let recorded = "```yaml\nlayout_prompt: A bedroom with a bed, a door, a nightstand\ncontext_free_prompt: Open the bedroom door\nobject_name: door\nobject_type: door\n```";
        let mut cassette = Cassette::new();
        cassette.insert_response("task-parse", bindings.clone(), recorded.to_string());
        let client = LlmClient::replay(cassette);
        let response = client.complete(&task_parse_template(), &bindings).unwrap();
        assert_eq!(response.raw_text, recorded);
        assert_eq!(response.parsed.str_field("object_type"), Some("door"));
    }

    #[test]
    fn replay_is_bit_deterministic() {
        let bindings = prompt_bindings("Open the window");
        let mut cassette = Cassette::new();
        cassette.insert_response(
            "task-parse",
            bindings.clone(),
            "```yaml\nobject_name: window\nobject_type: window\nlayout_prompt: A room with a window\ncontext_free_prompt: Open the window\n```".to_string(),
        );
        let client = LlmClient::replay(cassette);
        let a = client.complete(&task_parse_template(), &bindings).unwrap();
        let b = client.complete(&task_parse_template(), &bindings).unwrap();
        assert_eq!(a.raw_text, b.raw_text);
        assert_eq!(a.parsed, b.parsed);
    }

    #[test]
    fn malformed_replies_exhaust_the_budget() {
        let backend = QueueBackend {
            replies: vec!["no block here at all".to_string()],
            calls: AtomicU32::new(0),
        };
        let client = LlmClient::live(Box::new(backend), 2, 4);
        let err = client
            .complete(&task_parse_template(), &prompt_bindings("Close the door"))
            .unwrap_err();
        match err {
            LlmError::ParseFailure { attempts, .. } => assert_eq!(attempts, 2),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn retry_succeeds_when_a_later_reply_parses() {
        let backend = QueueBackend {
            replies: vec![
                "garbage".to_string(),
                "```yaml\nobject_name: cabinet\nobject_type: other\nlayout_prompt: x\ncontext_free_prompt: y\n```".to_string(),
            ],
            calls: AtomicU32::new(0),
        };
        let client = LlmClient::live(Box::new(backend), 3, 4);
        let response = client
            .complete(&task_parse_template(), &prompt_bindings("Open the cabinet"))
            .unwrap();
        assert_eq!(response.parsed.str_field("object_name"), Some("cabinet"));
    }

    #[test]
    fn cassette_miss_is_reported() {
        let client = LlmClient::replay(Cassette::new());
        let err = client
            .complete(&task_parse_template(), &prompt_bindings("Open the oven"))
            .unwrap_err();
        assert!(matches!(err, LlmError::CassetteMiss { .. }));
    }
}

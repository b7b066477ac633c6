use std::io;
use std::time::Duration;

use serde_json::{json, Value};

use super::{LlmError, PromptBundle};

#[derive(Debug, Clone, PartialEq)]
pub struct ClientConfig {
    /// Full URL of the chat-completion endpoint.
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    /// Per-request timeout, s.
    pub timeout: f64,
    pub max_retries: u32,
    pub temperature: f64,
}

impl ClientConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key: None,
            timeout: 30.0,
            max_retries: 2,
            temperature: 0.0,
        }
    }

    /// Reads `LLM_ENDPOINT`, `LLM_MODEL` and the optional `LLM_API_KEY`.
    pub fn from_env() -> Result<Self, LlmError> {
        let var = |k: &str| std::env::var(k).ok().filter(|v| !v.is_empty());
        let endpoint = var("LLM_ENDPOINT").ok_or_else(|| LlmError::Config("LLM_ENDPOINT is not set".into()))?;
        let model = var("LLM_MODEL").ok_or_else(|| LlmError::Config("LLM_MODEL is not set".into()))?;
        Ok(Self { api_key: var("LLM_API_KEY"), ..Self::new(endpoint, model) })
    }

    fn check(&self) -> Result<(), LlmError> {
        if !(self.timeout > 0.0 && self.timeout.is_finite()) {
            return Err(LlmError::Config(format!("timeout must be positive, got {}", self.timeout)));
        }
        Ok(())
    }
}

/// Anything that turns a prompt into completion text.
pub trait CompletionClient: Send {
    fn complete(&mut self, prompt: &PromptBundle) -> Result<String, LlmError>;
}

/// OpenAI-style chat-completion client. Clones share one connection pool,
/// and requests from different threads are independent.
#[derive(Clone)]
pub struct HttpClient {
    cfg: ClientConfig,
    agent: ureq::Agent,
}

impl HttpClient {
    pub fn new(cfg: ClientConfig) -> Result<Self, LlmError> {
        cfg.check()?;
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs_f64(cfg.timeout)).build();
        Ok(Self { cfg, agent })
    }

    pub fn config(&self) -> &ClientConfig {
        &self.cfg
    }

    fn request_once(&self, body: &Value) -> Result<String, LlmError> {
        let mut req = self.agent.post(&self.cfg.endpoint).set("Content-Type", "application/json");
        if let Some(key) = &self.cfg.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        let resp = match req.send_json(body.clone()) {
            Ok(r) => r,
            Err(ureq::Error::Status(status, r)) => {
                let body = r.into_string().unwrap_or_default();
                return Err(LlmError::NonSuccessStatus { status, body });
            }
            Err(ureq::Error::Transport(t)) => return Err(classify_transport(&t)),
        };
        let text = resp.into_string().map_err(|e| io_error(&e))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| LlmError::Payload(e.to_string()))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| LlmError::Payload("missing choices[0].message.content".into()))
    }

    pub fn call(&self, prompt: &PromptBundle) -> Result<String, LlmError> {
        let body = json!({
            "model": self.cfg.model,
            "temperature": self.cfg.temperature,
            "messages": [
                {"role": "system", "content": prompt.task_instruction},
                {"role": "user", "content": prompt.user_message()},
            ],
        });
        let mut attempt = 0;
        loop {
            match self.request_once(&body) {
                Err(e @ (LlmError::Transport(_) | LlmError::Timeout)) if attempt < self.cfg.max_retries => {
                    log::warn!("llm request failed ({e}), retrying");
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}

impl CompletionClient for HttpClient {
    fn complete(&mut self, prompt: &PromptBundle) -> Result<String, LlmError> {
        self.call(prompt)
    }
}

fn io_error(e: &io::Error) -> LlmError {
    if matches!(e.kind(), io::ErrorKind::TimedOut | io::ErrorKind::WouldBlock) {
        LlmError::Timeout
    } else {
        LlmError::Transport(e.to_string())
    }
}

fn classify_transport(t: &ureq::Transport) -> LlmError {
    let mut src: Option<&(dyn std::error::Error + 'static)> = std::error::Error::source(t);
    while let Some(e) = src {
        if let Some(ioe) = e.downcast_ref::<io::Error>() {
            return io_error(ioe);
        }
        src = e.source();
    }
    let msg = t.to_string();
    if msg.contains("timed out") {
        LlmError::Timeout
    } else {
        LlmError::Transport(msg)
    }
}

/// One-shot call with a fresh client.
pub fn llm_call(prompt: &PromptBundle, cfg: &ClientConfig) -> Result<String, LlmError> {
    HttpClient::new(cfg.clone())?.call(prompt)
}

type Responder = Box<dyn FnMut(&PromptBundle) -> Result<String, LlmError> + Send>;

/// In-process client for tests and offline runs.
pub struct MockClient {
    respond: Responder,
    pub calls: usize,
}

impl MockClient {
    pub fn from_fn(f: impl FnMut(&PromptBundle) -> Result<String, LlmError> + Send + 'static) -> Self {
        Self { respond: Box::new(f), calls: 0 }
    }

    pub fn fixed(text: impl Into<String>) -> Self {
        let text = text.into();
        Self::from_fn(move |_| Ok(text.clone()))
    }

    /// Replays `replies` in order, repeating the last one.
    pub fn sequence(replies: Vec<Result<String, LlmError>>) -> Self {
        assert!(!replies.is_empty(), "mock needs at least one reply");
        let mut i = 0;
        Self::from_fn(move |_| {
            let r = replies[i.min(replies.len() - 1)].clone();
            i += 1;
            r
        })
    }
}

impl CompletionClient for MockClient {
    fn complete(&mut self, prompt: &PromptBundle) -> Result<String, LlmError> {
        self.calls += 1;
        (self.respond)(prompt)
    }
}

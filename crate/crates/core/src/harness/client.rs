//! Chat-completion endpoint client.
//!
//! Wire format, bit-exact:
//!
//! Request: `POST <url>` with header `Authorization: Bearer <key>` (when
//! a key variable is configured) and JSON body
//! `{"model": "...", "temperature": 0.7, "messages": [{"role": "system"|"user"|"assistant", "content": "..."}]}`.
//!
//! Response: JSON body containing
//! `{"choices": [{"message": {"content": "..."}}]}`; the first choice's
//! content is the agent reply.

use super::agents::Agent;
use super::{ChatMessage, HarnessError, Role};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndpointConfig {
    /// Full URL of the chat-completion endpoint.
    pub url: String,
    pub model: String,
    /// Environment variable holding the bearer token. Credentials are
    /// never passed on the command line.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_retries")]
    pub max_retries: usize,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_temperature() -> f64 {
    0.7
}

fn default_retries() -> usize {
    3
}

fn default_timeout() -> u64 {
    120
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    temperature: f64,
    messages: Vec<WireMessage<'a>>,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireReply,
}

#[derive(Deserialize)]
struct WireReply {
    content: String,
}

fn wire_role(role: Role) -> &'static str {
    match role {
        Role::System => "system",
        Role::User => "user",
        Role::Assistant => "assistant",
        // Feedback rides as user content; the tool role is not part of
        // the wire contract.
        Role::Tool => "user",
    }
}

pub struct HttpEndpointAgent {
    config: EndpointConfig,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpEndpointAgent {
    pub fn new(config: EndpointConfig) -> Result<Self, HarnessError> {
        let api_key = match &config.api_key_env {
            Some(var) => match std::env::var(var) {
                Ok(value) => Some(value),
                Err(_) => {
                    return Err(HarnessError::Config(format!(
                        "credential variable `{var}` is not set"
                    )))
                }
            },
            None => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| HarnessError::Endpoint(e.to_string()))?;
        Ok(HttpEndpointAgent {
            config,
            api_key,
            client,
        })
    }

    fn request_once(&self, messages: &[ChatMessage]) -> Result<String, String> {
        let body = WireRequest {
            model: &self.config.model,
            temperature: self.config.temperature,
            messages: messages
                .iter()
                .map(|m| WireMessage {
                    role: wire_role(m.role),
                    content: &m.content,
                })
                .collect(),
        };
        let mut request = self.client.post(&self.config.url).json(&body);
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request.send().map_err(|e| e.to_string())?;
        let status = response.status();
        if !status.is_success() {
            let text = response.text().unwrap_or_default();
            return Err(format!("endpoint returned {status}: {text}"));
        }
        let parsed: WireResponse = response.json().map_err(|e| e.to_string())?;
        parsed
            .choices
            .first()
            .map(|c| c.message.content.clone())
            .ok_or_else(|| "endpoint reply has no choices".to_string())
    }
}

impl Agent for HttpEndpointAgent {
    fn name(&self) -> &str {
        &self.config.model
    }

    fn reply(&mut self, history: &[ChatMessage]) -> Result<String, HarnessError> {
        let mut last_error = String::new();
        for _ in 0..self.config.max_retries.max(1) {
            match self.request_once(history) {
                Ok(reply) => return Ok(reply),
                Err(e) => last_error = e,
            }
        }
        Err(HarnessError::Endpoint(last_error))
    }
}

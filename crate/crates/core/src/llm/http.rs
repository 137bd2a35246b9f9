//! Live chat-completion transport speaking the common HTTP protocol:
//! POST to the configured endpoint with `{model, messages, temperature}`,
//! bearer token read from the environment variable named in the provider
//! config.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{ChatBackend, LlmRequest, LlmResponse, ProviderFault};

#[derive(Debug, Serialize)]
struct ChatRequestBody<'a> {
    model: &'a str,
    messages: Vec<Message<'a>>,
    temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_tokens: Option<u32>,
}

#[derive(Debug, Serialize)]
struct Message<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Debug, Deserialize)]
struct ChatResponseBody {
    choices: Vec<Choice>,
    #[serde(default)]
    model: Option<String>,
    #[serde(default)]
    usage: Option<Usage>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Debug, Deserialize)]
struct ChoiceMessage {
    content: String,
}

#[derive(Debug, Deserialize)]
struct Usage {
    #[serde(default)]
    prompt_tokens: Option<u64>,
    #[serde(default)]
    completion_tokens: Option<u64>,
}

#[derive(Debug)]
pub struct HttpChatBackend {
    client: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    token: Option<String>,
}

impl HttpChatBackend {
    /// `auth_env` names the environment variable holding the bearer token;
    /// the credential value itself never appears in config files.
    pub fn new(
        endpoint: String,
        model: String,
        auth_env: Option<&str>,
        timeout: Duration,
    ) -> Result<Self, ProviderFault> {
        let token = match auth_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                ProviderFault::Auth(format!("environment variable {var} is not set"))
            })?),
            None => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ProviderFault::Fatal(format!("failed to build HTTP client: {e}")))?;
        Ok(Self {
            client,
            endpoint,
            model,
            token,
        })
    }
}

impl ChatBackend for HttpChatBackend {
    fn send(&self, request: &LlmRequest) -> Result<LlmResponse, ProviderFault> {
        let body = ChatRequestBody {
            model: &self.model,
            messages: vec![
                Message {
                    role: "system",
                    content: &request.system,
                },
                Message {
                    role: "user",
                    content: &request.user,
                },
            ],
            temperature: request.temperature,
            max_tokens: request.max_tokens,
        };
        let mut builder = self.client.post(&self.endpoint).json(&body);
        if let Some(token) = &self.token {
            builder = builder.bearer_auth(token);
        }
        let response = builder.send().map_err(|e| {
            if e.is_timeout() || e.is_connect() {
                ProviderFault::Transient(format!("request to {} failed: {e}", self.endpoint))
            } else {
                ProviderFault::Fatal(format!("request to {} failed: {e}", self.endpoint))
            }
        })?;
        let status = response.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(ProviderFault::Auth(format!(
                "provider rejected credentials ({status})"
            )));
        }
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(ProviderFault::Transient(format!(
                "provider returned {status}"
            )));
        }
        if !status.is_success() {
            return Err(ProviderFault::Fatal(format!("provider returned {status}")));
        }
        let parsed: ChatResponseBody = response
            .json()
            .map_err(|e| ProviderFault::Fatal(format!("malformed provider response: {e}")))?;
        let choice = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| ProviderFault::Fatal("provider returned no choices".to_string()))?;
        let usage = parsed.usage.unwrap_or(Usage {
            prompt_tokens: None,
            completion_tokens: None,
        });
        Ok(LlmResponse {
            text: choice.message.content,
            model: parsed.model,
            prompt_tokens: usage.prompt_tokens,
            completion_tokens: usage.completion_tokens,
        })
    }
}

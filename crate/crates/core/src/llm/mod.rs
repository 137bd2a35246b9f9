//! Uniform gateway to chat-completion providers for the five agent roles.
//!
//! All LLM traffic in the pipeline goes through [`Gateway`]: it renders the
//! role's versioned prompt template, enforces the bounded-parallelism limit,
//! retries transient transport failures with exponential backoff, parses the
//! role's structured output, and allows exactly one repair re-prompt on a
//! schema violation before failing hard. No code outside this module reads
//! provider credentials or performs network activity.

pub mod http;
pub mod mock;
pub mod parse;
pub mod prompt;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parallel::Semaphore;
use http::HttpChatBackend;
use mock::MockBackend;
use parse::{parse_structured, RoleOutput, SchemaViolation};
use prompt::{PromptSet, PromptTemplate, TemplateError};

/// The five agent roles of the pipeline, in pipeline order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AgentRole {
    Propositioner,
    CorefResolver,
    Extractor,
    Reconstructor,
    Inferrer,
}

impl AgentRole {
    pub const ALL: [AgentRole; 5] = [
        AgentRole::Propositioner,
        AgentRole::CorefResolver,
        AgentRole::Extractor,
        AgentRole::Reconstructor,
        AgentRole::Inferrer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgentRole::Propositioner => "PROPOSITIONER",
            AgentRole::CorefResolver => "COREF_RESOLVER",
            AgentRole::Extractor => "EXTRACTOR",
            AgentRole::Reconstructor => "RECONSTRUCTOR",
            AgentRole::Inferrer => "INFERRER",
        }
    }

    pub fn file_stem(self) -> &'static str {
        match self {
            AgentRole::Propositioner => "propositioner",
            AgentRole::CorefResolver => "coref_resolver",
            AgentRole::Extractor => "extractor",
            AgentRole::Reconstructor => "reconstructor",
            AgentRole::Inferrer => "inferrer",
        }
    }
}

/// A rendered request. Default temperature is 0 for every role.
#[derive(Debug, Clone)]
pub struct LlmRequest {
    pub role: AgentRole,
    pub system: String,
    pub user: String,
    pub temperature: f64,
    pub max_tokens: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct LlmResponse {
    pub text: String,
    pub model: Option<String>,
    pub prompt_tokens: Option<u64>,
    pub completion_tokens: Option<u64>,
}

/// Raw failure from a backend, before retry classification.
#[derive(Debug, Clone)]
pub enum ProviderFault {
    /// Timeouts / rate limits: retried with backoff.
    Transient(String),
    /// Credential rejected: never retried.
    Auth(String),
    /// Provider-reported, non-retryable failure.
    Fatal(String),
    MockFixtureMissing { role: AgentRole, input_hash: String },
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("transport failed after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("provider error: {0}")]
    Provider(String),
    #[error("no mock fixture for role {role} with input hash {input_hash}")]
    MockFixtureMissing { role: String, input_hash: String },
    #[error(transparent)]
    FixtureFormat(#[from] mock::FixtureFormatError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("schema violation persisted after one repair round: {0}")]
    Schema(SchemaViolation),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Live,
    Mock,
}

/// Provider configuration, deserialized from the run config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Name of the environment variable holding the bearer token.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth_env: Option<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_max_attempts")]
    pub max_attempts: u32,
    #[serde(default = "default_backoff_base_ms")]
    pub backoff_base_ms: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Fixture file for the mock provider.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixtures: Option<PathBuf>,
}

fn default_timeout_secs() -> u64 {
    60
}
fn default_max_attempts() -> u32 {
    3
}
fn default_backoff_base_ms() -> u64 {
    250
}
fn default_parallelism() -> usize {
    4
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            kind: ProviderKind::Mock,
            endpoint: None,
            model: None,
            auth_env: None,
            timeout_secs: default_timeout_secs(),
            max_attempts: default_max_attempts(),
            backoff_base_ms: default_backoff_base_ms(),
            parallelism: default_parallelism(),
            fixtures: None,
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_attempts < 1 {
            return Err("max_attempts must be >= 1".to_string());
        }
        if self.parallelism < 1 {
            return Err("parallelism must be >= 1".to_string());
        }
        if self.kind == ProviderKind::Live && self.endpoint.is_none() {
            return Err("live provider requires an endpoint".to_string());
        }
        Ok(())
    }
}

pub trait ChatBackend: Send + Sync {
    fn send(&self, request: &LlmRequest) -> Result<LlmResponse, ProviderFault>;
}

/// Appended to the user text for the single repair re-prompt. Fixture keys
/// cover the repaired text, so repair responses are themselves fixtures.
pub fn repair_suffix(violation: &SchemaViolation) -> String {
    format!(
        "\n\nThe previous response was invalid: {}. Respond again with only the required JSON.",
        violation.message
    )
}

pub struct Gateway {
    backend: Box<dyn ChatBackend>,
    prompts: PromptSet,
    max_attempts: u32,
    backoff_base: Duration,
    limiter: Semaphore,
}

impl Gateway {
    pub fn new(backend: Box<dyn ChatBackend>, prompts: PromptSet, config: &ProviderConfig) -> Self {
        Self {
            backend,
            prompts,
            max_attempts: config.max_attempts.max(1),
            backoff_base: Duration::from_millis(config.backoff_base_ms),
            limiter: Semaphore::new(config.parallelism.max(1)),
        }
    }

    pub fn from_config(config: &ProviderConfig, prompts: PromptSet) -> Result<Self, LlmError> {
        config.validate().map_err(LlmError::Provider)?;
        let backend: Box<dyn ChatBackend> = match config.kind {
            ProviderKind::Mock => {
                let backend = match &config.fixtures {
                    Some(path) => MockBackend::from_path(path)?,
                    None => MockBackend::default(),
                };
                Box::new(backend)
            }
            ProviderKind::Live => {
                let endpoint = config
                    .endpoint
                    .clone()
                    .ok_or_else(|| LlmError::Provider("live provider requires an endpoint".into()))?;
                let model = config.model.clone().unwrap_or_default();
                let backend = HttpChatBackend::new(
                    endpoint,
                    model,
                    config.auth_env.as_deref(),
                    Duration::from_secs(config.timeout_secs),
                )
                .map_err(|fault| fault_to_error(fault, 1))?;
                Box::new(backend)
            }
        };
        Ok(Self::new(backend, prompts, config))
    }

    pub fn prompts(&self) -> &PromptSet {
        &self.prompts
    }

    pub fn template(&self, role: AgentRole) -> &PromptTemplate {
        self.prompts.get(role)
    }

    /// Raw completion with retry. Transient faults back off exponentially
    /// (base * 2^(attempt-1)) up to `max_attempts` total attempts.
    pub fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, LlmError> {
        let _permit = self.limiter.acquire();
        let mut attempt = 0;
        loop {
            attempt += 1;
            match self.backend.send(request) {
                Ok(response) => return Ok(response),
                Err(ProviderFault::Transient(message)) => {
                    if attempt >= self.max_attempts {
                        return Err(LlmError::Transport {
                            attempts: attempt,
                            message,
                        });
                    }
                    let backoff = self.backoff_base * 2u32.saturating_pow(attempt - 1);
                    if !backoff.is_zero() {
                        std::thread::sleep(backoff);
                    }
                }
                Err(other) => return Err(fault_to_error(other, attempt)),
            }
        }
    }

    /// Renders the role's template, completes, and parses the structured
    /// output. On a schema violation, re-prompts once with the violation
    /// message appended, then fails hard.
    pub fn call_structured(
        &self,
        role: AgentRole,
        vars: &BTreeMap<&str, String>,
    ) -> Result<RoleOutput, LlmError> {
        let template = self.prompts.get(role);
        let user = template.render_user(vars)?;
        let request = LlmRequest {
            role,
            system: template.system.clone(),
            user,
            temperature: 0.0,
            max_tokens: None,
        };
        let response = self.complete(&request)?;
        match parse_structured(&response.text, role) {
            Ok(output) => Ok(output),
            Err(violation) => {
                let repair = LlmRequest {
                    user: format!("{}{}", request.user, repair_suffix(&violation)),
                    ..request
                };
                let response = self.complete(&repair)?;
                parse_structured(&response.text, role).map_err(LlmError::Schema)
            }
        }
    }
}

fn fault_to_error(fault: ProviderFault, attempts: u32) -> LlmError {
    match fault {
        ProviderFault::Transient(message) => LlmError::Transport { attempts, message },
        ProviderFault::Auth(message) => LlmError::Auth(message),
        ProviderFault::Fatal(message) => LlmError::Provider(message),
        ProviderFault::MockFixtureMissing { role, input_hash } => LlmError::MockFixtureMissing {
            role: role.name().to_string(),
            input_hash,
        },
    }
}

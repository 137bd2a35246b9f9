//! Deterministic mock chat provider backed by a JSON Lines fixture file.
//!
//! One entry per line: `{"role": "...", "input_hash": "...", "response": "..."}`.
//! The key hashes (role, rendered user text), so fixtures survive cosmetic
//! system-prompt edits as long as the user text is unchanged.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{AgentRole, ChatBackend, LlmRequest, LlmResponse, ProviderFault};

pub const MOCK_MODEL_NAME: &str = "mock";

/// Hash keying a fixture entry: sha256 over the role name, a unit
/// separator, and the rendered user text.
pub fn fixture_key(role: AgentRole, user_text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(role.name().as_bytes());
    hasher.update([0x1f]);
    hasher.update(user_text.as_bytes());
    format!("{:x}", hasher.finalize())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub role: AgentRole,
    pub input_hash: String,
    pub response: String,
}

#[derive(Debug, thiserror::Error)]
pub enum FixtureFormatError {
    #[error("failed to read fixture file {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed fixture entry: {message}")]
    Malformed {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: duplicate fixture key ({role}, {input_hash})")]
    DuplicateKey {
        path: String,
        line: usize,
        role: String,
        input_hash: String,
    },
}

/// In-memory table of fixture responses. An empty table is valid: it simply
/// errors on every query.
#[derive(Debug, Default, Clone)]
pub struct MockBackend {
    entries: HashMap<(AgentRole, String), String>,
}

impl MockBackend {
    pub fn from_path(path: &Path) -> Result<Self, FixtureFormatError> {
        let display = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|source| FixtureFormatError::Read {
            path: display.clone(),
            source,
        })?;
        let mut entries = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: FixtureEntry =
                serde_json::from_str(line).map_err(|e| FixtureFormatError::Malformed {
                    path: display.clone(),
                    line: i + 1,
                    message: e.to_string(),
                })?;
            let key = (entry.role, entry.input_hash.clone());
            if entries.insert(key, entry.response).is_some() {
                return Err(FixtureFormatError::DuplicateKey {
                    path: display,
                    line: i + 1,
                    role: entry.role.name().to_string(),
                    input_hash: entry.input_hash,
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn from_entries(entries: impl IntoIterator<Item = FixtureEntry>) -> Self {
        let entries = entries
            .into_iter()
            .map(|e| ((e.role, e.input_hash), e.response))
            .collect();
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl ChatBackend for MockBackend {
    fn send(&self, request: &LlmRequest) -> Result<LlmResponse, ProviderFault> {
        let hash = fixture_key(request.role, &request.user);
        match self.entries.get(&(request.role, hash.clone())) {
            Some(response) => Ok(LlmResponse {
                text: response.clone(),
                model: Some(MOCK_MODEL_NAME.to_string()),
                prompt_tokens: None,
                completion_tokens: None,
            }),
            None => Err(ProviderFault::MockFixtureMissing {
                role: request.role,
                input_hash: hash,
            }),
        }
    }
}

/// Builds fixture files: callers register (role, user text, response) and
/// write the table out as JSON Lines in insertion order.
#[derive(Debug, Default)]
pub struct FixtureBuilder {
    entries: Vec<FixtureEntry>,
}

impl FixtureBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, role: AgentRole, user_text: &str, response: impl Into<String>) {
        self.entries.push(FixtureEntry {
            role,
            input_hash: fixture_key(role, user_text),
            response: response.into(),
        });
    }

    pub fn entries(&self) -> &[FixtureEntry] {
        &self.entries
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            out.push_str(&serde_json::to_string(entry).expect("fixture entries serialize"));
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        let mut file = fs::File::create(path)?;
        file.write_all(self.to_jsonl().as_bytes())
    }

    pub fn into_backend(self) -> MockBackend {
        MockBackend::from_entries(self.entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(role: AgentRole, user: &str) -> LlmRequest {
        LlmRequest {
            role,
            system: "sys".to_string(),
            user: user.to_string(),
            temperature: 0.0,
            max_tokens: None,
        }
    }

    #[test]
    fn answers_registered_queries_verbatim() {
        let mut builder = FixtureBuilder::new();
        builder.push(AgentRole::Extractor, "input one", "[]");
        builder.push(AgentRole::Extractor, "input two", "[1]");
        builder.push(AgentRole::CorefResolver, "input one", "\"x\"");
        let backend = builder.into_backend();
        assert_eq!(backend.len(), 3);
        let response = backend.send(&request(AgentRole::Extractor, "input one")).unwrap();
        assert_eq!(response.text, "[]");
        assert_eq!(response.model.as_deref(), Some(MOCK_MODEL_NAME));
    }

    #[test]
    fn missing_fixture_names_role_and_hash() {
        let backend = MockBackend::default();
        let err = backend.send(&request(AgentRole::Extractor, "unseen")).unwrap_err();
        match err {
            ProviderFault::MockFixtureMissing { role, input_hash } => {
                assert_eq!(role, AgentRole::Extractor);
                assert_eq!(input_hash, fixture_key(AgentRole::Extractor, "unseen"));
            }
            other => panic!("unexpected fault: {other:?}"),
        }
    }

    #[test]
    fn duplicate_keys_are_rejected_on_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fixtures.jsonl");
        let mut builder = FixtureBuilder::new();
        builder.push(AgentRole::Extractor, "same", "[]");
        builder.push(AgentRole::Extractor, "same", "[]");
        builder.write_to(&path).unwrap();
        let err = MockBackend::from_path(&path).unwrap_err();
        assert!(matches!(err, FixtureFormatError::DuplicateKey { line: 2, .. }));
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fixtures.jsonl");
        fs::write(&path, "{\"role\":\"EXTRACTOR\",\"input_hash\":\"h\",\"response\":\"[]\"}\nnot json\n").unwrap();
        let err = MockBackend::from_path(&path).unwrap_err();
        assert!(matches!(err, FixtureFormatError::Malformed { line: 2, .. }));
    }

    #[test]
    fn empty_file_errors_on_every_query() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fixtures.jsonl");
        fs::write(&path, "").unwrap();
        let backend = MockBackend::from_path(&path).unwrap();
        assert!(backend.is_empty());
        assert!(backend.send(&request(AgentRole::Propositioner, "anything")).is_err());
    }

    #[test]
    fn fixture_key_ignores_system_text() {
        // Key depends on role + user text only.
        let k1 = fixture_key(AgentRole::Extractor, "u");
        let k2 = fixture_key(AgentRole::Extractor, "u");
        assert_eq!(k1, k2);
        assert_ne!(k1, fixture_key(AgentRole::Inferrer, "u"));
        assert_ne!(k1, fixture_key(AgentRole::Extractor, "v"));
    }

    #[test]
    fn jsonl_round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fixtures.jsonl");
        let mut builder = FixtureBuilder::new();
        builder.push(AgentRole::Reconstructor, "abc", "\"A sentence.\"");
        builder.write_to(&path).unwrap();
        let backend = MockBackend::from_path(&path).unwrap();
        let response = backend.send(&request(AgentRole::Reconstructor, "abc")).unwrap();
        assert_eq!(response.text, "\"A sentence.\"");
    }
}

//! Structured-output parsing for the agent roles.
//!
//! Each role declares a JSON shape (PROPOSITIONER: array of strings,
//! COREF_RESOLVER/RECONSTRUCTOR: one string, EXTRACTOR/INFERRER: array of
//! quadruple records). Responses may be wrapped in markdown fences or
//! surrounding prose; the first well-formed JSON value is extracted. All
//! core-model invariants (non-empty surfaces, non-empty context, non-empty
//! type labels) are enforced here, at parse time.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::AgentRole;

#[derive(Debug, Clone, Error)]
#[error("{role} response violates its schema: {message}")]
pub struct SchemaViolation {
    pub role: AgentRole,
    pub message: String,
}

impl SchemaViolation {
    fn new(role: AgentRole, message: impl Into<String>) -> Self {
        Self {
            role,
            message: message.into(),
        }
    }
}

/// Mention as emitted by the extractor or inferrer, before it becomes a
/// core-model mention.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionRecord {
    pub surface: String,
    #[serde(default)]
    pub types: Vec<String>,
}

/// The LLM output schema for one quadruple. Provenance and id are assigned
/// by the pipeline, never by the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadrupleRecord {
    pub subject: MentionRecord,
    pub predicate: MentionRecord,
    pub object: MentionRecord,
    pub context: String,
}

/// Parsed, validated role output.
#[derive(Debug, Clone, PartialEq)]
pub enum RoleOutput {
    Propositions(Vec<String>),
    Sentence(String),
    Quadruples(Vec<QuadrupleRecord>),
}

impl RoleOutput {
    pub fn into_propositions(self) -> Vec<String> {
        match self {
            RoleOutput::Propositions(v) => v,
            other => panic!("expected propositions, got {other:?}"),
        }
    }

    pub fn into_sentence(self) -> String {
        match self {
            RoleOutput::Sentence(s) => s,
            other => panic!("expected a sentence, got {other:?}"),
        }
    }

    pub fn into_quadruples(self) -> Vec<QuadrupleRecord> {
        match self {
            RoleOutput::Quadruples(v) => v,
            other => panic!("expected quadruple records, got {other:?}"),
        }
    }
}

/// Canonical serialization of a role output; `parse_structured` of this
/// text yields the value back.
pub fn serialize_role_output(output: &RoleOutput) -> String {
    match output {
        RoleOutput::Propositions(v) => serde_json::to_string(v),
        RoleOutput::Sentence(s) => serde_json::to_string(s),
        RoleOutput::Quadruples(v) => serde_json::to_string(v),
    }
    .expect("role outputs serialize")
}

pub fn parse_structured(raw: &str, role: AgentRole) -> Result<RoleOutput, SchemaViolation> {
    let body = strip_fence(raw.trim());
    match role {
        AgentRole::Propositioner => parse_propositions(body, role),
        AgentRole::CorefResolver | AgentRole::Reconstructor => parse_sentence(body, role),
        AgentRole::Extractor | AgentRole::Inferrer => parse_quadruples(body, role),
    }
}

/// Drops a ``` fence around the whole body, including a language tag on the
/// opening line.
fn strip_fence(body: &str) -> &str {
    let Some(rest) = body.strip_prefix("```") else {
        return body;
    };
    let Some(inner) = rest.strip_suffix("```") else {
        return body;
    };
    match inner.find('\n') {
        Some(nl) => inner[nl + 1..].trim(),
        None => inner.trim(),
    }
}

/// First well-formed JSON value starting at a structural `[` or `{`.
fn first_json_value(body: &str) -> Option<Value> {
    for (i, ch) in body.char_indices() {
        if ch == '[' || ch == '{' {
            let mut stream = serde_json::Deserializer::from_str(&body[i..]).into_iter::<Value>();
            if let Some(Ok(value)) = stream.next() {
                return Some(value);
            }
        }
    }
    None
}

fn parse_propositions(body: &str, role: AgentRole) -> Result<RoleOutput, SchemaViolation> {
    let value = first_json_value(body)
        .ok_or_else(|| SchemaViolation::new(role, "no JSON value found in response"))?;
    let Value::Array(items) = value else {
        return Err(SchemaViolation::new(role, "expected a JSON array of strings"));
    };
    let mut out = Vec::with_capacity(items.len());
    for (i, item) in items.into_iter().enumerate() {
        let Value::String(s) = item else {
            return Err(SchemaViolation::new(role, format!("element {i} is not a string")));
        };
        let s = s.trim().to_string();
        if s.is_empty() {
            return Err(SchemaViolation::new(role, format!("proposition {i} must be non-empty")));
        }
        out.push(s);
    }
    Ok(RoleOutput::Propositions(out))
}

/// A single-string role: the whole body as a JSON string when it parses as
/// one, otherwise the raw (unfenced) text verbatim.
fn parse_sentence(body: &str, role: AgentRole) -> Result<RoleOutput, SchemaViolation> {
    let text = match serde_json::from_str::<String>(body) {
        Ok(s) => s,
        Err(_) => body.to_string(),
    };
    let text = text.trim().to_string();
    if text.is_empty() {
        return Err(SchemaViolation::new(role, "sentence must be non-empty"));
    }
    Ok(RoleOutput::Sentence(text))
}

fn parse_quadruples(body: &str, role: AgentRole) -> Result<RoleOutput, SchemaViolation> {
    let value = first_json_value(body)
        .ok_or_else(|| SchemaViolation::new(role, "no JSON value found in response"))?;
    if !value.is_array() {
        return Err(SchemaViolation::new(role, "expected a JSON array of quadruple records"));
    }
    let records: Vec<QuadrupleRecord> = serde_json::from_value(value)
        .map_err(|e| SchemaViolation::new(role, format!("malformed quadruple record: {e}")))?;
    let mut out = Vec::with_capacity(records.len());
    for (i, record) in records.into_iter().enumerate() {
        out.push(validate_record(record, role, i)?);
    }
    Ok(RoleOutput::Quadruples(out))
}

fn validate_record(
    record: QuadrupleRecord,
    role: AgentRole,
    index: usize,
) -> Result<QuadrupleRecord, SchemaViolation> {
    let mention = |m: MentionRecord, what: &str| -> Result<MentionRecord, SchemaViolation> {
        let surface = m.surface.trim().to_string();
        if surface.is_empty() {
            return Err(SchemaViolation::new(
                role,
                format!("record {index}: {what} surface must be non-empty"),
            ));
        }
        let mut types = Vec::with_capacity(m.types.len());
        for label in m.types {
            let label = label.trim().to_string();
            if label.is_empty() {
                return Err(SchemaViolation::new(
                    role,
                    format!("record {index}: {what} type label must be non-empty"),
                ));
            }
            types.push(label);
        }
        Ok(MentionRecord { surface, types })
    };
    let context = record.context.trim().to_string();
    if context.is_empty() {
        return Err(SchemaViolation::new(
            role,
            format!("record {index}: context must be non-empty"),
        ));
    }
    Ok(QuadrupleRecord {
        subject: mention(record.subject, "subject")?,
        predicate: mention(record.predicate, "predicate")?,
        object: mention(record.object, "object")?,
        context,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_fenced_quadruple_array() {
        let raw = "```json\n[{\"subject\":{\"surface\":\"Smoking\",\"types\":[]},\
                   \"predicate\":{\"surface\":\"increases the risk of\",\"types\":[]},\
                   \"object\":{\"surface\":\"Pancreatic cancer\",\"types\":[]},\
                   \"context\":\"Stated directly.\"}]\n```";
        let out = parse_structured(raw, AgentRole::Extractor).unwrap().into_quadruples();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].subject.surface, "Smoking");
        assert_eq!(out[0].context, "Stated directly.");
    }

    #[test]
    fn parses_array_buried_in_prose() {
        let raw = "Sure! Here are the propositions:\n[\"First fact.\", \"Second fact.\"]\nHope that helps.";
        let out = parse_structured(raw, AgentRole::Propositioner).unwrap().into_propositions();
        assert_eq!(out, vec!["First fact.", "Second fact."]);
    }

    #[test]
    fn empty_array_is_not_an_error() {
        let out = parse_structured("[]", AgentRole::Extractor).unwrap().into_quadruples();
        assert!(out.is_empty());
    }

    #[test]
    fn empty_context_is_a_schema_violation() {
        let raw = "[{\"subject\":{\"surface\":\"A\",\"types\":[]},\
                   \"predicate\":{\"surface\":\"b\",\"types\":[]},\
                   \"object\":{\"surface\":\"C\",\"types\":[]},\
                   \"context\":\"  \"}]";
        let err = parse_structured(raw, AgentRole::Extractor).unwrap_err();
        assert!(err.message.contains("context must be non-empty"), "{}", err.message);
    }

    #[test]
    fn empty_surface_is_a_schema_violation() {
        let raw = "[{\"subject\":{\"surface\":\"\",\"types\":[]},\
                   \"predicate\":{\"surface\":\"b\",\"types\":[]},\
                   \"object\":{\"surface\":\"C\",\"types\":[]},\
                   \"context\":\"c\"}]";
        let err = parse_structured(raw, AgentRole::Extractor).unwrap_err();
        assert!(err.message.contains("subject surface"), "{}", err.message);
    }

    #[test]
    fn missing_types_field_defaults_to_empty() {
        let raw = "[{\"subject\":{\"surface\":\"A\"},\
                   \"predicate\":{\"surface\":\"b\"},\
                   \"object\":{\"surface\":\"C\"},\
                   \"context\":\"c\"}]";
        let out = parse_structured(raw, AgentRole::Inferrer).unwrap().into_quadruples();
        assert!(out[0].subject.types.is_empty());
    }

    #[test]
    fn sentence_role_accepts_json_string() {
        let out = parse_structured("\"Resolved sentence.\"", AgentRole::CorefResolver).unwrap();
        assert_eq!(out, RoleOutput::Sentence("Resolved sentence.".to_string()));
    }

    #[test]
    fn sentence_role_falls_back_to_raw_text() {
        let out = parse_structured("```\nPlain text sentence.\n```", AgentRole::Reconstructor).unwrap();
        assert_eq!(out, RoleOutput::Sentence("Plain text sentence.".to_string()));
    }

    #[test]
    fn empty_sentence_is_a_schema_violation() {
        assert!(parse_structured("\"\"", AgentRole::CorefResolver).is_err());
    }

    #[test]
    fn non_array_for_extractor_is_a_schema_violation() {
        let raw = "{\"subject\":{\"surface\":\"A\",\"types\":[]},\
                   \"predicate\":{\"surface\":\"b\",\"types\":[]},\
                   \"object\":{\"surface\":\"C\",\"types\":[]},\"context\":\"c\"}";
        let err = parse_structured(raw, AgentRole::Extractor).unwrap_err();
        assert!(err.message.contains("expected a JSON array"));
    }

    #[test]
    fn empty_proposition_string_is_a_schema_violation() {
        let err = parse_structured("[\"ok\", \"  \"]", AgentRole::Propositioner).unwrap_err();
        assert!(err.message.contains("must be non-empty"));
    }

    fn text_strategy() -> impl Strategy<Value = String> {
        "[ -~]{1,40}".prop_map(|s| s.trim().to_string()).prop_filter("non-empty", |s| !s.is_empty())
    }

    fn record_strategy() -> impl Strategy<Value = QuadrupleRecord> {
        (
            text_strategy(),
            text_strategy(),
            text_strategy(),
            text_strategy(),
            proptest::collection::vec(text_strategy(), 0..3),
        )
            .prop_map(|(s, p, o, c, types)| QuadrupleRecord {
                subject: MentionRecord { surface: s, types: types.clone() },
                predicate: MentionRecord { surface: p, types: vec![] },
                object: MentionRecord { surface: o, types },
                context: c,
            })
    }

    proptest! {
        #[test]
        fn quadruple_round_trip(records in proptest::collection::vec(record_strategy(), 0..5)) {
            let output = RoleOutput::Quadruples(records);
            let text = serialize_role_output(&output);
            let back = parse_structured(&text, AgentRole::Extractor).unwrap();
            prop_assert_eq!(back, output);
        }

        #[test]
        fn proposition_round_trip(items in proptest::collection::vec(text_strategy(), 0..6)) {
            let output = RoleOutput::Propositions(items);
            let text = serialize_role_output(&output);
            let back = parse_structured(&text, AgentRole::Propositioner).unwrap();
            prop_assert_eq!(back, output);
        }

        #[test]
        fn sentence_round_trip(s in text_strategy()) {
            let output = RoleOutput::Sentence(s);
            let text = serialize_role_output(&output);
            let back = parse_structured(&text, AgentRole::CorefResolver).unwrap();
            prop_assert_eq!(back, output);
        }
    }
}

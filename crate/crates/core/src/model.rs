//! Shared domain types flowing through every pipeline stage.
//!
//! All types here are immutable values once constructed and serialize to a
//! stable lowercase snake_case JSON shape, which doubles as the on-disk
//! audit/graph format.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::Scalar;

/// Separates fields in the canonical hash serialization of a quadruple.
const FIELD_SEP: char = '\u{1f}';
/// Separates items inside a type-label list in the hash serialization.
const ITEM_SEP: char = '\u{1e}';

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("abstract {id}: text is empty after trim")]
    EmptyAbstract { id: String },
    #[error("{what} surface is empty after trim")]
    EmptySurface { what: &'static str },
    #[error("quadruple context is empty after trim")]
    EmptyContext,
    #[error("type label is empty after trim")]
    EmptyTypeLabel,
}

/// One input document, in this pipeline a scientific abstract.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Abstract {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl Abstract {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        source: Option<String>,
    ) -> Result<Self, ModelError> {
        let id = id.into();
        let text = text.into();
        if text.trim().is_empty() {
            return Err(ModelError::EmptyAbstract { id });
        }
        Ok(Self { id, text, source })
    }
}

/// An atomic, self-contained statement chunked out of an abstract.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proposition {
    pub abstract_id: String,
    pub index: usize,
    pub text: String,
}

/// A proposition after coreference resolution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorefSentence {
    pub abstract_id: String,
    pub proposition_index: usize,
    pub text: String,
}

/// A surface form plus the free-form ontological category labels the
/// extractor attached to it. Labels are trimmed but otherwise verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub surface: String,
    pub types: Vec<String>,
}

impl EntityMention {
    pub fn new(
        surface: impl Into<String>,
        types: impl IntoIterator<Item = String>,
    ) -> Result<Self, ModelError> {
        mention(surface.into(), types, "entity").map(|(surface, types)| Self { surface, types })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateMention {
    pub surface: String,
    pub types: Vec<String>,
}

impl PredicateMention {
    pub fn new(
        surface: impl Into<String>,
        types: impl IntoIterator<Item = String>,
    ) -> Result<Self, ModelError> {
        mention(surface.into(), types, "predicate").map(|(surface, types)| Self { surface, types })
    }
}

fn mention(
    surface: String,
    types: impl IntoIterator<Item = String>,
    what: &'static str,
) -> Result<(String, Vec<String>), ModelError> {
    let surface = surface.trim().to_string();
    if surface.is_empty() {
        return Err(ModelError::EmptySurface { what });
    }
    let mut out = Vec::new();
    for label in types {
        let label = label.trim().to_string();
        if label.is_empty() {
            return Err(ModelError::EmptyTypeLabel);
        }
        out.push(label);
    }
    Ok((surface, out))
}

/// Whether a quadruple was read out of a sentence or proposed by the
/// cluster-bridging inference loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Extracted,
    Inferred,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Extracted => "extracted",
            Origin::Inferred => "inferred",
        }
    }
}

/// Where a quadruple came from. Inferred quadruples have no proposition
/// index: they are justified by the whole abstract.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub abstract_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposition_index: Option<usize>,
    pub origin: Origin,
}

/// A triple enhanced with type labels and a mandatory context sentence
/// justifying why the relationship was extracted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quadruple {
    pub id: String,
    pub subject: EntityMention,
    pub predicate: PredicateMention,
    pub object: EntityMention,
    pub context: String,
    pub provenance: Provenance,
}

impl Quadruple {
    /// Builds a quadruple, trimming the context and assigning the content
    /// hash id. The context must be non-empty for both origins: it is the
    /// fourth element.
    pub fn new(
        subject: EntityMention,
        predicate: PredicateMention,
        object: EntityMention,
        context: impl Into<String>,
        provenance: Provenance,
    ) -> Result<Self, ModelError> {
        let context = context.into().trim().to_string();
        if context.is_empty() {
            return Err(ModelError::EmptyContext);
        }
        let id = quadruple_id(&subject, &predicate, &object, &context, provenance.origin);
        Ok(Self {
            id,
            subject,
            predicate,
            object,
            context,
            provenance,
        })
    }
}

/// The classical (subject, relationship, object) unit, only ever produced by
/// projecting a quadruple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub subject: EntityMention,
    pub predicate: PredicateMention,
    pub object: EntityMention,
}

/// Drops the context and provenance, keeping surfaces and type lists.
pub fn project_triple(q: &Quadruple) -> Triple {
    Triple {
        subject: q.subject.clone(),
        predicate: q.predicate.clone(),
        object: q.object.clone(),
    }
}

/// Content hash identifying a quadruple.
///
/// Canonical serialization: UTF-8 fields in order subject.surface,
/// subject.types, predicate.surface, predicate.types, object.surface,
/// object.types, context, origin, joined with the unit separator; type
/// lists join their items with the record separator. Stable across runs
/// and platforms, sensitive to every content field and to the origin.
pub fn quadruple_id(
    subject: &EntityMention,
    predicate: &PredicateMention,
    object: &EntityMention,
    context: &str,
    origin: Origin,
) -> String {
    let types = |labels: &[String]| -> String {
        let mut s = String::new();
        for (i, label) in labels.iter().enumerate() {
            if i > 0 {
                s.push(ITEM_SEP);
            }
            s.push_str(label);
        }
        s
    };
    let fields = [
        subject.surface.clone(),
        types(&subject.types),
        predicate.surface.clone(),
        types(&predicate.types),
        object.surface.clone(),
        types(&object.types),
        context.to_string(),
        origin.as_str().to_string(),
    ];
    let mut hasher = Sha256::new();
    for (i, field) in fields.iter().enumerate() {
        if i > 0 {
            hasher.update([FIELD_SEP as u8]);
        }
        hasher.update(field.as_bytes());
    }
    format!("{:x}", hasher.finalize())
}

/// One reconstruction of a quadruple (or its projected triple) back into a
/// sentence, with its similarity to the original coref sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub quadruple_id: String,
    pub text: String,
    pub similarity: Scalar,
}

/// Per-proposition trail of everything the pipeline produced for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub abstract_id: String,
    pub proposition_index: usize,
    pub proposition_text: String,
    pub coref_text: String,
    pub quadruples: Vec<Quadruple>,
    pub quad_reconstructions: Vec<Reconstruction>,
    pub triple_reconstructions: Vec<Reconstruction>,
    /// Version of the prompt templates that produced this record.
    pub prompt_version: String,
}

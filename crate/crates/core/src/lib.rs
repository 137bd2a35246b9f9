//! Pipeline engine turning scientific abstracts into context-enriched
//! knowledge graphs.
//!
//! Staged LLM agents chunk each abstract into propositions, resolve
//! coreferences, and extract quadruples: (subject, predicate, object)
//! triples with ontological type labels plus a context sentence justifying
//! the extraction. Extraction fidelity is checked by round-trip
//! reconstruction scored with sentence-embedding cosine similarity, and
//! graph fragmentation is repaired by an iterative cluster-bridging
//! inference loop.
//!
//! The vector and statistics math is generic over the scalar type (see
//! [`num::Real`]); the pipeline itself runs at [`Scalar`].

pub mod embedding;
pub mod llm;
pub mod model;
pub mod num;
pub mod parallel;
pub mod stats;

/// Scalar type the pipeline runs at.
pub type Scalar = f64;

/// Embedding vector at the pipeline scalar.
pub type Embedding = embedding::EmbeddingVector<Scalar>;

/// Similarity score at the pipeline scalar.
pub type Similarity = embedding::SimilarityScore<Scalar>;

pub use embedding::{cosine, Embedder, HashEmbedder};
pub use llm::{AgentRole, Gateway, LlmError, ProviderConfig, ProviderKind};
pub use model::{
    project_triple, quadruple_id, Abstract, AuditRecord, CorefSentence, EntityMention, Origin,
    PredicateMention, Proposition, Provenance, Quadruple, Reconstruction, Triple,
};

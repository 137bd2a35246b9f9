//! Sentence-embedding providers and exact vector similarity math.
//!
//! The math is generic over the scalar type; the pipeline instantiates it
//! at [`crate::Scalar`]. Embeddings are not pre-normalized here: `cosine`
//! divides by the norms explicitly so any provider convention works.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::num::Real;
use crate::Scalar;

/// Fixed seed mixed into the deterministic test embedder's token hash.
pub const HASH_EMBEDDER_SEED: u64 = 0x71d6_4b67_0c7a_11ed;

/// Reference dimension, matching the 384-dimensional reference model.
pub const DEFAULT_DIMENSION: usize = 384;

/// Default per-text token limit for the hash embedder.
pub const DEFAULT_TOKEN_LIMIT: usize = 8192;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("text is empty after trim")]
    EmptyText,
    #[error("text has {tokens} tokens, exceeding the provider limit of {limit}")]
    TokenLimitExceeded { tokens: usize, limit: usize },
    #[error("embedding transport failed: {0}")]
    Transport(String),
    #[error("embedding provider error: {0}")]
    Provider(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimilarityError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cosine of an all-zero vector is undefined")]
    ZeroVector,
}

/// A fixed-length real vector produced by an embedding provider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector<S> {
    values: Vec<S>,
}

impl<S: Real> EmbeddingVector<S> {
    /// All entries must be finite.
    pub fn new(values: Vec<S>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { values }
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == S::zero())
    }
}

/// A cosine similarity, clamped to [-1, 1] to absorb rounding.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimilarityScore<S>(S);

impl<S: Real> SimilarityScore<S> {
    pub fn new(value: S) -> Self {
        Self(value.min(S::one()).max(-S::one()))
    }

    pub fn value(self) -> S {
        self.0
    }
}

/// dot(u,v) / (‖u‖·‖v‖), clamped to [-1, 1].
pub fn cosine<S: Real>(
    u: &EmbeddingVector<S>,
    v: &EmbeddingVector<S>,
) -> Result<SimilarityScore<S>, SimilarityError> {
    if u.dimension() != v.dimension() {
        return Err(SimilarityError::DimensionMismatch {
            left: u.dimension(),
            right: v.dimension(),
        });
    }
    if u.is_zero() || v.is_zero() {
        return Err(SimilarityError::ZeroVector);
    }
    let mut dot = S::zero();
    let mut norm_u = S::zero();
    let mut norm_v = S::zero();
    for (a, b) in u.values().iter().zip(v.values()) {
        dot = dot + *a * *b;
        norm_u = norm_u + *a * *a;
        norm_v = norm_v + *b * *b;
    }
    Ok(SimilarityScore::new(
        dot / (norm_u.sqrt() * norm_v.sqrt()),
    ))
}

/// Anything that can embed a sentence at the pipeline scalar type.
pub trait Embedder: Send + Sync {
    fn embed(&self, text: &str) -> Result<EmbeddingVector<Scalar>, EmbedError>;
    fn dimension(&self) -> usize;
}

/// Deterministic test embedder: hashes whitespace tokens into signed
/// buckets and L2-normalizes. Equal texts map to equal vectors; a
/// permutation of tokens maps to the same bag-of-tokens vector. Not
/// semantically meaningful.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dimension: usize,
    token_limit: usize,
    seed: u64,
}

impl Default for HashEmbedder {
    fn default() -> Self {
        Self::new(DEFAULT_DIMENSION, DEFAULT_TOKEN_LIMIT)
    }
}

impl HashEmbedder {
    pub fn new(dimension: usize, token_limit: usize) -> Self {
        assert!(dimension > 0, "embedding dimension must be positive");
        Self {
            dimension,
            token_limit,
            seed: HASH_EMBEDDER_SEED,
        }
    }

    pub fn embed_generic<S: Real>(&self, text: &str) -> Result<EmbeddingVector<S>, EmbedError> {
        if text.trim().is_empty() {
            return Err(EmbedError::EmptyText);
        }
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() > self.token_limit {
            return Err(EmbedError::TokenLimitExceeded {
                tokens: tokens.len(),
                limit: self.token_limit,
            });
        }
        let mut buckets = vec![0i64; self.dimension];
        for token in tokens {
            let mut hasher = Sha256::new();
            hasher.update(self.seed.to_le_bytes());
            hasher.update(token.as_bytes());
            let digest = hasher.finalize();
            let raw = u64::from_le_bytes(digest[..8].try_into().unwrap());
            let bucket = (raw % self.dimension as u64) as usize;
            let sign = if digest[8] & 1 == 0 { 1 } else { -1 };
            buckets[bucket] += sign;
        }
        let norm = buckets
            .iter()
            .map(|&c| (c * c) as f64)
            .sum::<f64>()
            .sqrt();
        let values = buckets
            .into_iter()
            .map(|c| {
                let v = if norm == 0.0 { 0.0 } else { c as f64 / norm };
                S::from_f64(v).expect("bucket weight fits any Real")
            })
            .collect();
        Ok(EmbeddingVector::new(values))
    }
}

impl Embedder for HashEmbedder {
    fn embed(&self, text: &str) -> Result<EmbeddingVector<Scalar>, EmbedError> {
        self.embed_generic(text)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn vec64(values: &[f64]) -> EmbeddingVector<f64> {
        EmbeddingVector::new(values.to_vec())
    }

    #[test]
    fn cosine_identity_is_one() {
        let u = vec64(&[0.3, -1.2, 4.0]);
        assert_eq!(cosine(&u, &u).unwrap().value(), 1.0);
    }

    #[test]
    fn cosine_orthogonal_is_zero() {
        let u = vec64(&[1.0, 0.0]);
        let v = vec64(&[0.0, 1.0]);
        assert_eq!(cosine(&u, &v).unwrap().value(), 0.0);
    }

    #[test]
    fn cosine_negation_is_minus_one() {
        let u = vec64(&[2.0, -3.0, 0.5]);
        let v = vec64(&[-2.0, 3.0, -0.5]);
        assert_eq!(cosine(&u, &v).unwrap().value(), -1.0);
    }

    #[test]
    fn cosine_rejects_dimension_mismatch() {
        let u = vec64(&[1.0, 2.0]);
        let v = vec64(&[1.0, 2.0, 3.0]);
        assert_eq!(
            cosine(&u, &v),
            Err(SimilarityError::DimensionMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn cosine_rejects_zero_vector() {
        let u = vec64(&[0.0, 0.0]);
        let v = vec64(&[1.0, 1.0]);
        assert_eq!(cosine(&u, &v), Err(SimilarityError::ZeroVector));
    }

    #[test]
    fn cosine_works_at_f32() {
        let u = EmbeddingVector::new(vec![1.0f32, 0.0]);
        let v = EmbeddingVector::new(vec![1.0f32, 0.0]);
        assert_eq!(cosine(&u, &v).unwrap().value(), 1.0f32);
    }

    #[test]
    fn hash_embedder_is_deterministic() {
        let e = HashEmbedder::default();
        let a = e.embed("Smoking increases the risk of Pancreatic cancer.").unwrap();
        let b = e.embed("Smoking increases the risk of Pancreatic cancer.").unwrap();
        assert_eq!(a, b);
        assert_abs_diff_eq!(cosine(&a, &b).unwrap().value(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hash_embedder_rejects_empty_text() {
        let e = HashEmbedder::default();
        assert!(matches!(e.embed("   "), Err(EmbedError::EmptyText)));
    }

    #[test]
    fn hash_embedder_enforces_token_limit() {
        let e = HashEmbedder::new(16, 3);
        assert!(matches!(
            e.embed("one two three four"),
            Err(EmbedError::TokenLimitExceeded { tokens: 4, limit: 3 })
        ));
        assert!(e.embed("one two three").is_ok());
    }

    #[test]
    fn hash_embedder_is_a_bag_of_tokens() {
        let e = HashEmbedder::default();
        let a = e.embed("alpha beta gamma").unwrap();
        let b = e.embed("gamma alpha beta").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hash_embedder_distinguishes_texts() {
        // Direct comparison over a 100-sentence corpus: every pair of
        // distinct sentences differs in at least one vector entry.
        let e = HashEmbedder::default();
        let sentences: Vec<String> = (0..100)
            .map(|i| format!("Sentence number {i} mentions factor f{i} and outcome o{}.", i * 7))
            .collect();
        let vectors: Vec<_> = sentences.iter().map(|s| e.embed(s).unwrap()).collect();
        for i in 0..vectors.len() {
            for j in (i + 1)..vectors.len() {
                assert_ne!(vectors[i], vectors[j], "{i} vs {j}");
            }
        }
    }

    proptest! {
        #[test]
        fn cosine_is_symmetric(
            pair in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 1..64)
        ) {
            let u = EmbeddingVector::new(pair.iter().map(|p| p.0).collect());
            let v = EmbeddingVector::new(pair.iter().map(|p| p.1).collect());
            if let (Ok(a), Ok(b)) = (cosine(&u, &v), cosine(&v, &u)) {
                prop_assert_eq!(a.value(), b.value());
            }
        }

        #[test]
        fn cosine_is_scale_invariant(
            pair in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 1..64),
            a in 0.001f64..1000.0,
            b in 0.001f64..1000.0,
        ) {
            let u = EmbeddingVector::new(pair.iter().map(|p| p.0).collect());
            let v = EmbeddingVector::new(pair.iter().map(|p| p.1).collect());
            let su = EmbeddingVector::new(u.values().iter().map(|x| x * a).collect());
            let sv = EmbeddingVector::new(v.values().iter().map(|x| x * b).collect());
            if let (Ok(plain), Ok(scaled)) = (cosine(&u, &v), cosine(&su, &sv)) {
                prop_assert!((plain.value() - scaled.value()).abs() < 1e-12);
            }
        }

        #[test]
        fn scores_stay_clamped(
            pair in proptest::collection::vec((-1000.0f64..1000.0, -1000.0f64..1000.0), 1..32)
        ) {
            let u = EmbeddingVector::new(pair.iter().map(|p| p.0).collect());
            let v = EmbeddingVector::new(pair.iter().map(|p| p.1).collect());
            if let Ok(s) = cosine(&u, &v) {
                prop_assert!((-1.0..=1.0).contains(&s.value()));
            }
        }
    }
}

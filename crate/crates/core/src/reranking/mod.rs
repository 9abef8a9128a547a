//! Reranking with target-token relevance probabilities.
//!
//! A sequence-to-sequence model is asked to continue
//! `Query: q Document: d Relevant:` and the logits of two target words at
//! the first decoding step are read off. The relevance probability is the
//! softmax over just those two logits, taken for the positive word.
//! Documents too long for the model are split into overlapping sentence
//! windows and take the probability of their best window.
//!
//! The model sits behind the [`Scorer`] trait. [`OverlapScorer`] is a
//! deterministic stand-in for tests; [`RemoteScorer`] talks to an inference
//! service over HTTP.

mod prob;
mod prompt;
pub mod remote;
mod rerank;
mod scorer;
mod segment;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use prob::{relevance_prob, ScoreRecord};
pub use prompt::render_prompt;
pub use remote::{remote_score_batch, RemoteConfig, RemoteScorer};
pub use rerank::{rerank, rerank_run, score_document, DocumentSource, RerankedDoc};
pub use scorer::{overlap_score, LogitPair, OverlapScorer, PromptPair, Scorer, ScorerError};
pub use segment::{make_passages, segment_document, split_sentences, window_spans, Passage, WindowConfig};

/// The positive and negative target words.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetWordConfig {
    pub positive: String,
    pub negative: String,
}

impl Default for TargetWordConfig {
    fn default() -> Self {
        TargetWordConfig {
            positive: "true".into(),
            negative: "false".into(),
        }
    }
}

impl TargetWordConfig {
    pub fn new(positive: impl Into<String>, negative: impl Into<String>) -> Result<Self, RerankError> {
        let t = TargetWordConfig {
            positive: positive.into(),
            negative: negative.into(),
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), RerankError> {
        if self.positive.is_empty() || self.negative.is_empty() {
            return Err(RerankError::InvalidTarget("target words must be non-empty".into()));
        }
        if self.positive == self.negative {
            return Err(RerankError::InvalidTarget(format!(
                "positive and negative target words are both `{}`",
                self.positive
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum RerankError {
    #[error("invalid target words: {0}")]
    InvalidTarget(String),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("logits must be finite, got ({0}, {1})")]
    NonFiniteLogit(f64, f64),
    #[error("document `{0}` has no text to score")]
    EmptyDocument(String),
    #[error("{} candidate document(s) not found in the corpus: {}", .0.len(), .0.join(", "))]
    MissingDocuments(Vec<String>),
    #[error("no query text for topic `{0}`")]
    MissingQuery(String),
    #[error("topic `{topic}`: {source}")]
    Topic {
        topic: String,
        #[source]
        source: Box<RerankError>,
    },
    #[error("scoring {context}: {source}")]
    Scorer {
        context: String,
        #[source]
        source: ScorerError,
    },
}

use std::collections::HashSet;

use thiserror::Error;

use super::TargetWordConfig;
use crate::retrieval::{analyze, AnalyzerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptPair<'a> {
    pub query: &'a str,
    pub passage: &'a str,
}

/// First-decode-step logits of the positive and negative target words.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogitPair {
    pub pos: f64,
    pub neg: f64,
}

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: usize, message: String },
    #[error("service error `{code}`: {message}")]
    Service { code: String, message: String },
    #[error("expected {expected} score(s), got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite logits for pair {index}")]
    NonFinite { index: usize },
    #[error("query has no terms after analysis")]
    EmptyQuery,
    #[error("malformed response: {0}")]
    Malformed(String),
}

/// Produces target-word logits for query-passage pairs.
///
/// Output is index-aligned with the input and deterministic for fixed
/// inputs. Implementations that cannot take concurrent `score_batch` calls
/// return false from [`concurrent`](Scorer::concurrent); callers then
/// serialize their requests.
pub trait Scorer: Send + Sync {
    fn score_batch(&self, pairs: &[PromptPair<'_>], target: &TargetWordConfig) -> Result<Vec<LogitPair>, ScorerError>;

    fn concurrent(&self) -> bool {
        true
    }
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn score_batch(&self, pairs: &[PromptPair<'_>], target: &TargetWordConfig) -> Result<Vec<LogitPair>, ScorerError> {
        (**self).score_batch(pairs, target)
    }

    fn concurrent(&self) -> bool {
        (**self).concurrent()
    }
}

impl<S: Scorer + ?Sized> Scorer for Box<S> {
    fn score_batch(&self, pairs: &[PromptPair<'_>], target: &TargetWordConfig) -> Result<Vec<LogitPair>, ScorerError> {
        (**self).score_batch(pairs, target)
    }

    fn concurrent(&self) -> bool {
        (**self).concurrent()
    }
}

/// Checks the length and finiteness contract on a scorer's output.
pub(crate) fn checked_score(
    scorer: &dyn Scorer,
    pairs: &[PromptPair<'_>],
    target: &TargetWordConfig,
) -> Result<Vec<LogitPair>, ScorerError> {
    if pairs.is_empty() {
        return Ok(Vec::new());
    }
    let out = scorer.score_batch(pairs, target)?;
    if out.len() != pairs.len() {
        return Err(ScorerError::LengthMismatch {
            expected: pairs.len(),
            got: out.len(),
        });
    }
    if let Some(index) = out.iter().position(|l| !(l.pos.is_finite() && l.neg.is_finite())) {
        return Err(ScorerError::NonFinite { index });
    }
    Ok(out)
}

/// Fraction `v` of distinct analyzed query terms that occur in the passage,
/// returned as logits `(v, 1 − v)`.
pub fn overlap_score(query: &str, passage: &str, cfg: &AnalyzerConfig) -> Result<LogitPair, ScorerError> {
    let q: HashSet<String> = analyze(query, cfg).into_iter().collect();
    if q.is_empty() {
        return Err(ScorerError::EmptyQuery);
    }
    let p: HashSet<String> = analyze(passage, cfg).into_iter().collect();
    let v = q.intersection(&p).count() as f64 / q.len() as f64;
    Ok(LogitPair { pos: v, neg: 1.0 - v })
}

/// Term-overlap stand-in for a relevance model. Ignores the target words.
#[derive(Debug, Clone, Default)]
pub struct OverlapScorer {
    pub analyzer: AnalyzerConfig,
}

impl OverlapScorer {
    pub fn new(analyzer: AnalyzerConfig) -> Self {
        OverlapScorer { analyzer }
    }
}

impl Scorer for OverlapScorer {
    fn score_batch(&self, pairs: &[PromptPair<'_>], _target: &TargetWordConfig) -> Result<Vec<LogitPair>, ScorerError> {
        pairs
            .iter()
            .map(|p| overlap_score(p.query, p.passage, &self.analyzer))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reranking::relevance_prob;

    fn plain() -> AnalyzerConfig {
        AnalyzerConfig::plain()
    }

    #[test]
    fn full_zero_and_half_overlap() {
        let full = overlap_score("cat dog", "dog and cat", &plain()).unwrap();
        assert_eq!(full, LogitPair { pos: 1.0, neg: 0.0 });
        assert!((relevance_prob(full.pos, full.neg).unwrap() - 0.731059).abs() < 1e-6);

        let none = overlap_score("cat dog", "bird", &plain()).unwrap();
        assert_eq!(none, LogitPair { pos: 0.0, neg: 1.0 });
        assert!((relevance_prob(none.pos, none.neg).unwrap() - 0.268941).abs() < 1e-6);

        let half = overlap_score("cat dog", "a cat", &plain()).unwrap();
        assert_eq!(half, LogitPair { pos: 0.5, neg: 0.5 });
        assert_eq!(relevance_prob(half.pos, half.neg).unwrap(), 0.5);
    }

    #[test]
    fn repeated_query_terms_count_once() {
        let s = overlap_score("cat cat dog", "cat", &plain()).unwrap();
        assert_eq!(s.pos, 0.5);
    }

    #[test]
    fn empty_query_fails() {
        assert!(matches!(
            overlap_score("...", "x", &plain()),
            Err(ScorerError::EmptyQuery)
        ));
    }

    struct Short;
    impl Scorer for Short {
        fn score_batch(&self, _: &[PromptPair<'_>], _: &TargetWordConfig) -> Result<Vec<LogitPair>, ScorerError> {
            Ok(vec![LogitPair {
                pos: f64::NAN,
                neg: 0.0,
            }])
        }
    }

    #[test]
    fn contract_checks() {
        let t = TargetWordConfig::default();
        let one = [PromptPair {
            query: "q",
            passage: "p",
        }];
        assert!(matches!(
            checked_score(&Short, &one, &t),
            Err(ScorerError::NonFinite { index: 0 })
        ));
        let two = [one[0], one[0]];
        assert!(matches!(
            checked_score(&Short, &two, &t),
            Err(ScorerError::LengthMismatch { expected: 2, got: 1 })
        ));
        assert!(checked_score(&Short, &[], &t).unwrap().is_empty());
    }
}

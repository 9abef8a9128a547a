//! RM3 query expansion.
//!
//! 1. Retrieve the top `fb_docs` documents for the original query with BM25.
//! 2. Normalize their scores to sum to one: `s_i`.
//! 3. Estimate the relevance model `P_RM1(w) = Σ_i s_i · tf(w, d_i) / dl(d_i)`.
//! 4. Keep the `fb_terms` most probable terms (ties by term) and renormalize.
//! 5. Interpolate: `weight(w) = α·P_q(w) + (1 − α)·P_RM1(w)`, where `P_q` is
//!    the maximum-likelihood model of the analyzed query (each occurrence
//!    counts) and `α` is `original_weight`.
//!
//! Terms whose final weight is zero are dropped.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::analyze::analyze;
use super::bm25::{search_terms, search_weighted, Bm25Params};
use super::index::InvertedIndex;
use super::RetrievalError;
use crate::corpus_io::RunList;
use crate::exec::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Rm3Params {
    pub fb_docs: usize,
    pub fb_terms: usize,
    pub original_weight: f64,
}

impl Default for Rm3Params {
    fn default() -> Self {
        Rm3Params {
            fb_docs: 10,
            fb_terms: 10,
            original_weight: 0.5,
        }
    }
}

impl Rm3Params {
    pub fn validate(&self) -> Result<(), RetrievalError> {
        if self.fb_docs == 0 || self.fb_terms == 0 {
            return Err(RetrievalError::InvalidParams(
                "fb_docs and fb_terms must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.original_weight) {
            return Err(RetrievalError::InvalidParams(format!(
                "original_weight must be in [0, 1], got {}",
                self.original_weight
            )));
        }
        Ok(())
    }
}

/// A query as a term-to-weight map. Weights are finite and positive and
/// there is at least one term. Iteration is in term order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedQuery {
    weights: BTreeMap<String, f64>,
}

impl WeightedQuery {
    pub fn new(weights: BTreeMap<String, f64>) -> Result<Self, RetrievalError> {
        if weights.is_empty() {
            return Err(RetrievalError::EmptyQuery);
        }
        if let Some((t, w)) = weights.iter().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(RetrievalError::InvalidParams(format!(
                "weight of `{t}` must be finite and positive, got {w}"
            )));
        }
        Ok(WeightedQuery { weights })
    }

    /// Maximum-likelihood query model: each term gets its share of the
    /// occurrences.
    pub fn from_terms(terms: &[String]) -> Result<Self, RetrievalError> {
        if terms.is_empty() {
            return Err(RetrievalError::EmptyQuery);
        }
        let n = terms.len() as f64;
        let mut counts: BTreeMap<String, f64> = BTreeMap::new();
        for t in terms {
            *counts.entry(t.clone()).or_insert(0.0) += 1.0;
        }
        for c in counts.values_mut() {
            *c /= n;
        }
        Ok(WeightedQuery { weights: counts })
    }

    pub fn get(&self, term: &str) -> Option<f64> {
        self.weights.get(term).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(t, &w)| (t.as_str(), w))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.values().sum()
    }

    pub fn into_map(self) -> BTreeMap<String, f64> {
        self.weights
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub query: WeightedQuery,
    /// The truncated, renormalized relevance model (empty without feedback).
    pub relevance_model: BTreeMap<String, f64>,
    /// Number of feedback documents used. Zero means nothing was retrieved
    /// and `query` is the original query model.
    pub feedback_docs: usize,
}

impl Expansion {
    pub fn used_feedback(&self) -> bool {
        self.feedback_docs > 0
    }
}

pub fn rm3_expand(
    index: &InvertedIndex,
    bm25: &Bm25Params,
    query_text: &str,
    params: &Rm3Params,
) -> Result<Expansion, RetrievalError> {
    params.validate()?;
    let terms = analyze(query_text, index.analyzer());
    let original = WeightedQuery::from_terms(&terms)?;

    let feedback = search_terms(index, bm25, &terms, params.fb_docs);
    let total: f64 = feedback.iter().map(|(_, s)| s).sum();
    if feedback.is_empty() || total <= 0.0 {
        return Ok(Expansion {
            query: original,
            relevance_model: BTreeMap::new(),
            feedback_docs: 0,
        });
    }

    let mut rm1: HashMap<&str, f64> = HashMap::new();
    for (doc_id, score) in &feedback {
        let ord = index.doc_ordinal(doc_id).expect("retrieved document is indexed");
        let dl = f64::from(index.doc_lens[ord as usize]);
        let doc_weight = score / total;
        for (term, tf) in index.doc_terms(ord) {
            *rm1.entry(term).or_insert(0.0) += doc_weight * f64::from(tf) / dl;
        }
    }
    let mut ranked: Vec<(&str, f64)> = rm1.into_iter().filter(|&(_, p)| p > 0.0).collect();
    ranked.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(params.fb_terms);
    let kept: f64 = ranked.iter().map(|(_, p)| p).sum();
    let relevance_model: BTreeMap<String, f64> = ranked.into_iter().map(|(t, p)| (t.to_owned(), p / kept)).collect();

    let alpha = params.original_weight;
    let mut weights: BTreeMap<String, f64> = BTreeMap::new();
    for (t, p) in original.iter() {
        *weights.entry(t.to_owned()).or_insert(0.0) += alpha * p;
    }
    for (t, p) in &relevance_model {
        *weights.entry(t.clone()).or_insert(0.0) += (1.0 - alpha) * p;
    }
    weights.retain(|_, w| *w > 0.0);

    Ok(Expansion {
        query: WeightedQuery::new(weights)?,
        relevance_model,
        feedback_docs: feedback.len(),
    })
}

/// Expands and searches every `(topic_id, query_text)` pair. Topics whose
/// query analyzes to nothing get an empty result list.
pub fn expand_search_batch(
    index: &InvertedIndex,
    bm25: &Bm25Params,
    rm3: &Rm3Params,
    queries: &[(String, String)],
    k: usize,
    tag: &str,
    exec: Execution,
) -> Result<RunList, RetrievalError> {
    rm3.validate()?;
    let results = exec.try_map(queries, |(_, text)| match rm3_expand(index, bm25, text, rm3) {
        Ok(exp) => Ok(search_weighted(index, bm25, &exp.query, k)),
        Err(RetrievalError::EmptyQuery) => Ok(Vec::new()),
        Err(e) => Err(e),
    })?;
    let mut run = RunList::new(tag);
    for ((topic, _), ranked) in queries.iter().zip(results) {
        run.insert_ranked(topic.clone(), ranked);
    }
    Ok(run)
}

//! BM25 scoring and top-k search.
//!
//! ```text
//! score(q, d) = Σ_{t in q} idf(t) · tf·(k1 + 1) / (tf + k1·(1 − b + b·dl/avgdl))
//! idf(t)      = ln(1 + (N − df + 0.5) / (df + 0.5))
//! ```
//!
//! Query terms are not deduplicated: a term repeated in the query adds its
//! contribution once per occurrence. Terms that occur in no document are
//! skipped.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::analyze::analyze;
use super::index::InvertedIndex;
use super::rm3::WeightedQuery;
use super::RetrievalError;
use crate::corpus_io::RunList;
use crate::exec::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 0.9, b: 0.4 }
    }
}

impl Bm25Params {
    pub fn new(k1: f64, b: f64) -> Result<Self, RetrievalError> {
        let p = Bm25Params { k1, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), RetrievalError> {
        if !(self.k1.is_finite() && self.k1 > 0.0) {
            return Err(RetrievalError::InvalidParams(format!(
                "k1 must be > 0, got {}",
                self.k1
            )));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(RetrievalError::InvalidParams(format!(
                "b must be in [0, 1], got {}",
                self.b
            )));
        }
        Ok(())
    }
}

pub fn idf(num_docs: usize, df: usize) -> f64 {
    let (n, df) = (num_docs as f64, df as f64);
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

#[inline]
fn saturate(tf: u32, dl: u32, avgdl: f64, p: &Bm25Params) -> f64 {
    let tf = f64::from(tf);
    tf * (p.k1 + 1.0) / (tf + p.k1 * (1.0 - p.b + p.b * f64::from(dl) / avgdl))
}

/// BM25 score of one document for already-analyzed query terms.
pub fn bm25_score(
    index: &InvertedIndex,
    params: &Bm25Params,
    query_terms: &[String],
    doc_id: &str,
) -> Result<f64, RetrievalError> {
    let ord = index
        .doc_ordinal(doc_id)
        .ok_or_else(|| RetrievalError::UnknownDocument(doc_id.to_owned()))?;
    let dl = index.doc_lens[ord as usize];
    let avgdl = index.avgdl();
    let mut score = 0.0;
    for term in query_terms {
        let list = index.postings(term);
        if list.is_empty() {
            continue;
        }
        if let Ok(i) = list.binary_search_by_key(&ord, |p| p.doc) {
            score += idf(index.num_docs(), list.len()) * saturate(list[i].tf, dl, avgdl, params);
        }
    }
    Ok(score)
}

/// Score descending, then document id ascending.
fn rank_order(index: &InvertedIndex) -> impl Fn(&(u32, f64), &(u32, f64)) -> Ordering + '_ {
    move |a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| index.doc_ids[a.0 as usize].cmp(&index.doc_ids[b.0 as usize]))
    }
}

fn top_k(index: &InvertedIndex, acc: HashMap<u32, f64>, k: usize) -> Vec<(String, f64)> {
    let mut hits: Vec<(u32, f64)> = acc.into_iter().filter(|&(_, s)| s > 0.0).collect();
    let cmp = rank_order(index);
    if hits.len() > k {
        hits.select_nth_unstable_by(k - 1, &cmp);
        hits.truncate(k);
    }
    hits.sort_unstable_by(&cmp);
    hits.into_iter()
        .map(|(d, s)| (index.doc_ids[d as usize].clone(), s))
        .collect()
}

/// Accumulates `weight · bm25_term(t, d)` term-at-a-time. Contributions for
/// a document are added in query order, so the totals match
/// [`bm25_score`] bit for bit when all weights are 1.
fn accumulate<'a, I>(index: &InvertedIndex, params: &Bm25Params, weighted_terms: I) -> HashMap<u32, f64>
where
    I: IntoIterator<Item = (&'a str, f64)>,
{
    let avgdl = index.avgdl();
    let mut acc: HashMap<u32, f64> = HashMap::new();
    for (term, weight) in weighted_terms {
        let list = index.postings(term);
        if list.is_empty() {
            continue;
        }
        let w = idf(index.num_docs(), list.len());
        for p in list {
            let c = w * saturate(p.tf, index.doc_lens[p.doc as usize], avgdl, params);
            *acc.entry(p.doc).or_insert(0.0) += weight * c;
        }
    }
    acc
}

pub fn search_terms(index: &InvertedIndex, params: &Bm25Params, terms: &[String], k: usize) -> Vec<(String, f64)> {
    if k == 0 {
        return Vec::new();
    }
    let acc = accumulate(index, params, terms.iter().map(|t| (t.as_str(), 1.0)));
    top_k(index, acc, k)
}

/// Top-`k` documents with a positive score for `query_text`, analyzed with
/// the index's analyzer.
pub fn search(index: &InvertedIndex, params: &Bm25Params, query_text: &str, k: usize) -> Vec<(String, f64)> {
    let terms = analyze(query_text, index.analyzer());
    search_terms(index, params, &terms, k)
}

/// Scores `Σ_w weight(w) · bm25_term(w, d)`. Terms are used as given; they
/// are expected to be analyzed already.
pub fn search_weighted(
    index: &InvertedIndex,
    params: &Bm25Params,
    query: &WeightedQuery,
    k: usize,
) -> Vec<(String, f64)> {
    if k == 0 {
        return Vec::new();
    }
    let acc = accumulate(index, params, query.iter());
    top_k(index, acc, k)
}

/// Runs [`search`] for every `(topic_id, query_text)` pair and collects the
/// results into a run. Topics run concurrently under
/// [`Execution::Parallel`].
pub fn search_batch(
    index: &InvertedIndex,
    params: &Bm25Params,
    queries: &[(String, String)],
    k: usize,
    tag: &str,
    exec: Execution,
) -> RunList {
    let results = exec.map(queries, |(_, text)| search(index, params, text, k));
    let mut run = RunList::new(tag);
    for ((topic, _), ranked) in queries.iter().zip(results) {
        run.insert_ranked(topic.clone(), ranked);
    }
    run
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::Document;
    use crate::retrieval::AnalyzerConfig;

    fn toy_index() -> InvertedIndex {
        let docs = vec![
            Document::new("d1", "cat sat mat"),
            Document::new("d2", "cat cat dog"),
            Document::new("d3", "dog runs"),
        ];
        InvertedIndex::build(&docs, AnalyzerConfig::plain()).unwrap()
    }

    fn terms(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn toy_scores() {
        let idx = toy_index();
        let p = Bm25Params::default();
        assert!((idf(3, 2) - 1.6f64.ln()).abs() < 1e-15);
        let s1 = bm25_score(&idx, &p, &terms(&["cat"]), "d1").unwrap();
        let s2 = bm25_score(&idx, &p, &terms(&["cat"]), "d2").unwrap();
        assert!((s1 - 0.4592).abs() < 1e-4, "{s1}");
        assert!((s2 - 0.6064).abs() < 1e-4, "{s2}");
        assert_eq!(bm25_score(&idx, &p, &terms(&["zzz"]), "d1").unwrap(), 0.0);
        assert_eq!(bm25_score(&idx, &p, &terms(&["cat"]), "d3").unwrap(), 0.0);
    }

    #[test]
    fn repeated_query_terms_count_twice() {
        let idx = toy_index();
        let p = Bm25Params::default();
        let once = bm25_score(&idx, &p, &terms(&["cat"]), "d1").unwrap();
        let twice = bm25_score(&idx, &p, &terms(&["cat", "cat"]), "d1").unwrap();
        assert_eq!(twice, once + once);
    }

    #[test]
    fn unknown_document() {
        let idx = toy_index();
        assert!(matches!(
            bm25_score(&idx, &Bm25Params::default(), &terms(&["cat"]), "d9"),
            Err(RetrievalError::UnknownDocument(_))
        ));
    }

    #[test]
    fn search_orders_and_truncates() {
        let idx = toy_index();
        let p = Bm25Params::default();
        let hits = search(&idx, &p, "cat", 1000);
        let ids: Vec<&str> = hits.iter().map(|h| h.0.as_str()).collect();
        assert_eq!(ids, vec!["d2", "d1"]);
        assert_eq!(hits[0].1, bm25_score(&idx, &p, &terms(&["cat"]), "d2").unwrap());
        assert!(search(&idx, &p, "zzz", 1000).is_empty());
        let top1 = search(&idx, &p, "cat", 1);
        assert_eq!(top1.len(), 1);
        assert_eq!(top1[0].0, "d2");
    }

    #[test]
    fn ties_break_by_doc_id() {
        let docs = vec![
            Document::new("b", "x"),
            Document::new("c", "x"),
            Document::new("a", "x"),
            Document::new("z", "y"),
        ];
        let idx = InvertedIndex::build(&docs, AnalyzerConfig::plain()).unwrap();
        let hits = search(&idx, &Bm25Params::default(), "x", 2);
        let ids: Vec<&str> = hits.iter().map(|h| h.0.as_str()).collect();
        assert_eq!(ids, vec!["a", "b"]);
    }

    #[test]
    fn params_are_validated() {
        assert!(Bm25Params::new(0.0, 0.4).is_err());
        assert!(Bm25Params::new(0.9, 1.5).is_err());
        assert!(Bm25Params::new(1.2, 0.75).is_ok());
    }

    #[test]
    fn batch_matches_single_searches() {
        let idx = toy_index();
        let p = Bm25Params::default();
        let queries = vec![
            ("q1".to_owned(), "cat".to_owned()),
            ("q2".to_owned(), "dog runs".to_owned()),
        ];
        for exec in [Execution::Sequential, Execution::Parallel] {
            let run = search_batch(&idx, &p, &queries, 10, "bm25", exec);
            let q2 = run.topic("q2").unwrap();
            assert_eq!(q2[0].doc_id, "d3");
            assert_eq!(q2[0].rank, 1);
            assert_eq!(run.topic("q1").unwrap().len(), 2);
            run.validate().unwrap();
        }
    }
}

use std::collections::HashMap;

use super::prob::ScoreRecord;
use super::scorer::{checked_score, PromptPair, Scorer, ScorerError};
use super::segment::{segment_document, Passage, WindowConfig};
use super::{RerankError, TargetWordConfig};
use crate::corpus_io::{Corpus, Document, RunEntry, RunList};
use crate::exec::Execution;

/// Lookup of candidate documents by id.
pub trait DocumentSource: Sync {
    fn document(&self, id: &str) -> Option<&Document>;
}

impl DocumentSource for Corpus {
    fn document(&self, id: &str) -> Option<&Document> {
        self.get(id)
    }
}

impl DocumentSource for HashMap<String, Document> {
    fn document(&self, id: &str) -> Option<&Document> {
        self.get(id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerankedDoc {
    pub doc_id: String,
    /// Record of the best-scoring passage.
    pub record: ScoreRecord,
    pub best_passage: usize,
}

/// Highest probability wins; ties go to the earliest passage.
fn best_of(records: &[ScoreRecord]) -> (ScoreRecord, usize) {
    let mut best = 0;
    for (i, r) in records.iter().enumerate().skip(1) {
        if r.prob > records[best].prob {
            best = i;
        }
    }
    (records[best], best)
}

fn scorer_error(passages: &[Passage], source: ScorerError) -> RerankError {
    let context = match &source {
        ScorerError::NonFinite { index } if *index < passages.len() => {
            let p = &passages[*index];
            format!("document `{}` passage {}", p.doc_id, p.index)
        }
        _ => match passages {
            [only] => format!("document `{}` passage {}", only.doc_id, only.index),
            _ => {
                let first = passages.first().map_or("", |p| p.doc_id.as_str());
                let last = passages.last().map_or("", |p| p.doc_id.as_str());
                if first == last {
                    format!("document `{first}` ({} passages)", passages.len())
                } else {
                    format!("{} passages from `{first}` to `{last}`", passages.len())
                }
            }
        },
    };
    RerankError::Scorer { context, source }
}

fn score_passages(
    passages: &[Passage],
    query: &str,
    scorer: &dyn Scorer,
    target: &TargetWordConfig,
) -> Result<Vec<ScoreRecord>, RerankError> {
    let pairs: Vec<PromptPair<'_>> = passages
        .iter()
        .map(|p| PromptPair {
            query,
            passage: &p.text,
        })
        .collect();
    let logits = checked_score(scorer, &pairs, target).map_err(|e| scorer_error(passages, e))?;
    logits.into_iter().map(|l| ScoreRecord::new(l.pos, l.neg)).collect()
}

/// Scores every window of `doc` in one scorer call and returns the best
/// window's record with its index.
pub fn score_document(
    doc: &Document,
    query: &str,
    scorer: &dyn Scorer,
    target: &TargetWordConfig,
    window: WindowConfig,
) -> Result<(ScoreRecord, usize), RerankError> {
    target.validate()?;
    let passages = segment_document(&doc.id, &doc.text, window)?;
    let records = score_passages(&passages, query, scorer, target)?;
    Ok(best_of(&records))
}

/// Reorders one topic's candidates by relevance probability (descending,
/// ties by document id).
///
/// All windows of all candidates go to the scorer in a single call, so a
/// batching scorer sees the whole topic at once.
pub fn rerank(
    candidates: &[RunEntry],
    query: &str,
    docs: &dyn DocumentSource,
    scorer: &dyn Scorer,
    target: &TargetWordConfig,
    window: WindowConfig,
) -> Result<Vec<RerankedDoc>, RerankError> {
    target.validate()?;
    window.validate()?;
    let mut resolved = Vec::with_capacity(candidates.len());
    let mut missing = Vec::new();
    for c in candidates {
        match docs.document(&c.doc_id) {
            Some(d) => resolved.push(d),
            None => missing.push(c.doc_id.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(RerankError::MissingDocuments(missing));
    }

    let mut passages = Vec::new();
    let mut bounds = Vec::with_capacity(resolved.len());
    for d in &resolved {
        let start = passages.len();
        passages.extend(segment_document(&d.id, &d.text, window)?);
        bounds.push(start..passages.len());
    }
    let records = score_passages(&passages, query, scorer, target)?;

    let mut out: Vec<RerankedDoc> = resolved
        .iter()
        .zip(bounds)
        .map(|(d, range)| {
            let (record, best_passage) = best_of(&records[range]);
            RerankedDoc {
                doc_id: d.id.clone(),
                record,
                best_passage,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        b.record
            .prob
            .total_cmp(&a.record.prob)
            .then_with(|| a.doc_id.cmp(&b.doc_id))
    });
    Ok(out)
}

/// Reranks the top `depth` candidates of every topic in `run` (all of them
/// when `depth` is `None`). Run scores become the relevance probabilities.
///
/// Topics are processed concurrently only if the scorer allows it.
#[allow(clippy::too_many_arguments)]
pub fn rerank_run(
    run: &RunList,
    queries: &HashMap<String, String>,
    docs: &dyn DocumentSource,
    scorer: &dyn Scorer,
    target: &TargetWordConfig,
    window: WindowConfig,
    depth: Option<usize>,
    tag: &str,
    exec: Execution,
) -> Result<RunList, RerankError> {
    let topics: Vec<(&str, &[RunEntry])> = run.topics().collect();
    let exec = if scorer.concurrent() {
        exec
    } else {
        Execution::Sequential
    };
    let results = exec.try_map(&topics, |&(topic, entries)| {
        let query = queries
            .get(topic)
            .ok_or_else(|| RerankError::MissingQuery(topic.to_owned()))?;
        let n = depth.map_or(entries.len(), |d| d.min(entries.len()));
        rerank(&entries[..n], query, docs, scorer, target, window).map_err(|e| RerankError::Topic {
            topic: topic.to_owned(),
            source: Box::new(e),
        })
    })?;
    let mut out = RunList::new(tag);
    for ((topic, _), ranked) in topics.into_iter().zip(results) {
        out.insert_ranked(topic, ranked.into_iter().map(|r| (r.doc_id, r.record.prob)).collect());
    }
    Ok(out)
}

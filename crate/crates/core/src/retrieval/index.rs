use std::collections::HashMap;

use super::analyze::{analyze, AnalyzerConfig};
use super::RetrievalError;
use crate::corpus_io::Document;
use crate::exec::Execution;

/// Documents analyzed per parallel batch while building. Bounds the memory
/// held in analyzed-but-unmerged form.
const BUILD_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    /// Ordinal of the document in input order.
    pub doc: u32,
    pub tf: u32,
}

/// An in-memory inverted index with the collection statistics BM25 and RM3
/// need.
///
/// Documents are identified internally by their ordinal in input order;
/// postings lists are sorted by that ordinal. A forward index (document to
/// term frequencies) is kept alongside for relevance-feedback models.
#[derive(Debug, Clone)]
pub struct InvertedIndex {
    pub(crate) analyzer: AnalyzerConfig,
    pub(crate) doc_ids: Vec<String>,
    pub(crate) doc_lens: Vec<u32>,
    pub(crate) doc_lookup: HashMap<String, u32>,
    pub(crate) term_ids: HashMap<String, u32>,
    pub(crate) terms: Vec<String>,
    pub(crate) postings: Vec<Vec<Posting>>,
    pub(crate) forward: Vec<Vec<(u32, u32)>>,
    pub(crate) total_len: u64,
}

/// Term counts for one document, sorted by term so that merging is
/// independent of hash iteration order.
fn count_terms(text: &str, cfg: &AnalyzerConfig) -> Vec<(String, u32)> {
    let mut counts: HashMap<String, u32> = HashMap::new();
    for t in analyze(text, cfg) {
        *counts.entry(t).or_insert(0) += 1;
    }
    let mut v: Vec<(String, u32)> = counts.into_iter().collect();
    v.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    v
}

impl InvertedIndex {
    pub fn build(docs: &[Document], analyzer: AnalyzerConfig) -> Result<Self, RetrievalError> {
        Self::build_with(docs, analyzer, Execution::default())
    }

    /// Analysis runs in parallel batches; merging is sequential in document
    /// order, so the result is identical for every execution mode.
    pub fn build_with(docs: &[Document], analyzer: AnalyzerConfig, exec: Execution) -> Result<Self, RetrievalError> {
        if docs.is_empty() {
            return Err(RetrievalError::EmptyCorpus);
        }
        if docs.len() > u32::MAX as usize {
            return Err(RetrievalError::InvalidParams(format!(
                "corpus of {} documents exceeds the index limit",
                docs.len()
            )));
        }
        let mut index = InvertedIndex {
            analyzer,
            doc_ids: Vec::with_capacity(docs.len()),
            doc_lens: Vec::with_capacity(docs.len()),
            doc_lookup: HashMap::with_capacity(docs.len()),
            term_ids: HashMap::new(),
            terms: Vec::new(),
            postings: Vec::new(),
            forward: Vec::with_capacity(docs.len()),
            total_len: 0,
        };
        for chunk in docs.chunks(BUILD_CHUNK) {
            let cfg = &index.analyzer;
            let analyzed = exec.map(chunk, |d| count_terms(&d.text, cfg));
            for (doc, counts) in chunk.iter().zip(analyzed) {
                index.push_document(&doc.id, counts)?;
            }
        }
        Ok(index)
    }

    fn push_document(&mut self, id: &str, counts: Vec<(String, u32)>) -> Result<(), RetrievalError> {
        let ordinal = self.doc_ids.len() as u32;
        if self.doc_lookup.insert(id.to_owned(), ordinal).is_some() {
            return Err(RetrievalError::DuplicateId(id.to_owned()));
        }
        let mut len = 0u32;
        let mut fwd = Vec::with_capacity(counts.len());
        for (term, tf) in counts {
            len += tf;
            let tid = match self.term_ids.get(&term) {
                Some(&t) => t,
                None => {
                    let t = self.terms.len() as u32;
                    self.term_ids.insert(term.clone(), t);
                    self.terms.push(term);
                    self.postings.push(Vec::new());
                    t
                }
            };
            self.postings[tid as usize].push(Posting { doc: ordinal, tf });
            fwd.push((tid, tf));
        }
        fwd.sort_unstable_by_key(|&(t, _)| t);
        self.doc_ids.push(id.to_owned());
        self.doc_lens.push(len);
        self.forward.push(fwd);
        self.total_len += u64::from(len);
        Ok(())
    }

    /// Rebuilds the lookup tables and forward index from ids, lengths and
    /// postings.
    pub(crate) fn from_parts(
        analyzer: AnalyzerConfig,
        doc_ids: Vec<String>,
        doc_lens: Vec<u32>,
        terms: Vec<String>,
        postings: Vec<Vec<Posting>>,
    ) -> Result<Self, RetrievalError> {
        let corrupt = |m: String| RetrievalError::CorruptIndex(m);
        if doc_ids.is_empty() {
            return Err(RetrievalError::EmptyCorpus);
        }
        let mut doc_lookup = HashMap::with_capacity(doc_ids.len());
        for (i, id) in doc_ids.iter().enumerate() {
            if doc_lookup.insert(id.clone(), i as u32).is_some() {
                return Err(corrupt(format!("duplicate document id `{id}`")));
            }
        }
        let mut term_ids = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if term_ids.insert(t.clone(), i as u32).is_some() {
                return Err(corrupt(format!("duplicate term `{t}`")));
            }
        }
        let mut forward: Vec<Vec<(u32, u32)>> = vec![Vec::new(); doc_ids.len()];
        let mut sums = vec![0u64; doc_ids.len()];
        for (tid, list) in postings.iter().enumerate() {
            let mut prev: Option<u32> = None;
            for p in list {
                if p.doc as usize >= doc_ids.len() || p.tf == 0 || prev.is_some_and(|d| d >= p.doc) {
                    return Err(corrupt(format!("bad posting list for term `{}`", terms[tid])));
                }
                prev = Some(p.doc);
                forward[p.doc as usize].push((tid as u32, p.tf));
                sums[p.doc as usize] += u64::from(p.tf);
            }
        }
        for (d, (&len, &sum)) in doc_lens.iter().zip(&sums).enumerate() {
            if u64::from(len) != sum {
                return Err(corrupt(format!(
                    "length of `{}` is {len} but postings sum to {sum}",
                    doc_ids[d]
                )));
            }
        }
        let total_len = sums.iter().sum();
        Ok(InvertedIndex {
            analyzer,
            doc_ids,
            doc_lens,
            doc_lookup,
            term_ids,
            terms,
            postings,
            forward,
            total_len,
        })
    }

    pub fn analyzer(&self) -> &AnalyzerConfig {
        &self.analyzer
    }

    pub fn num_docs(&self) -> usize {
        self.doc_ids.len()
    }

    /// Mean analyzed document length in tokens.
    pub fn avgdl(&self) -> f64 {
        self.total_len as f64 / self.doc_ids.len() as f64
    }

    pub fn total_len(&self) -> u64 {
        self.total_len
    }

    pub fn vocabulary_size(&self) -> usize {
        self.terms.len()
    }

    /// Document ids in input order.
    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_ordinal(&self, id: &str) -> Option<u32> {
        self.doc_lookup.get(id).copied()
    }

    pub fn doc_len(&self, id: &str) -> Option<u32> {
        self.doc_ordinal(id).map(|o| self.doc_lens[o as usize])
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.term_ids
            .get(term)
            .map_or(&[], |&t| self.postings[t as usize].as_slice())
    }

    pub fn term_freq(&self, term: &str, doc_id: &str) -> Option<u32> {
        let ord = self.doc_ordinal(doc_id)?;
        let list = self.postings(term);
        Some(list.binary_search_by_key(&ord, |p| p.doc).map_or(0, |i| list[i].tf))
    }

    /// `(term, tf)` pairs of one document, by ordinal.
    pub fn doc_terms(&self, ordinal: u32) -> impl Iterator<Item = (&str, u32)> + '_ {
        self.forward[ordinal as usize]
            .iter()
            .map(move |&(t, tf)| (self.terms[t as usize].as_str(), tf))
    }

    /// Terms in first-seen order.
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub(crate) fn term_postings(&self) -> &[Vec<Posting>] {
        &self.postings
    }
}

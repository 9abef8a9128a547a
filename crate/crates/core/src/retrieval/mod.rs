//! First-stage retrieval: analysis, inverted index, BM25, RM3.

mod analyze;
mod bm25;
mod index;
mod persist;
pub mod porter;
mod rm3;

use std::io;

use thiserror::Error;

pub use analyze::{analyze, english_stopwords, AnalyzerConfig, Stemmer};
pub use bm25::{bm25_score, idf, search, search_batch, search_terms, search_weighted, Bm25Params};
pub use index::{InvertedIndex, Posting};
pub use persist::{read_index, write_index, FORMAT_VERSION, MAGIC};
pub use rm3::{expand_search_batch, rm3_expand, Expansion, Rm3Params, WeightedQuery};

/// Default retrieval depth per query.
pub const DEFAULT_DEPTH: usize = 1000;

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("cannot build an index over an empty corpus")]
    EmptyCorpus,
    #[error("duplicate document id `{0}`")]
    DuplicateId(String),
    #[error("unknown document `{0}`")]
    UnknownDocument(String),
    #[error("query has no terms after analysis")]
    EmptyQuery,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("not an index file (bad magic bytes)")]
    BadMagic,
    #[error("index format version {found} is not supported (expected {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },
    #[error("corrupt index: {0}")]
    CorruptIndex(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

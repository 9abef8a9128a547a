//! Readers and writers for corpora, topics, qrels, run files and training
//! instances.
//!
//! All parsers are strict: input must be UTF-8, column counts are exact, and
//! every error carries the 1-based line number it was detected on. Blank
//! lines are skipped.

mod corpus;
mod qrels;
mod run;
mod topics;
mod train;

use std::io::{self, BufRead};

use thiserror::Error;

pub use corpus::{parse_corpus, Corpus, CorpusFormat, Document};
pub use qrels::{parse_qrels, QrelSet};
pub use run::{parse_run, write_run, RunEntry, RunError, RunList};
pub use topics::{parse_topics, Topic, TopicFormat};
pub use train::{parse_train, write_train, Label, TrainFormat, TrainInstance};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: duplicate judgment for topic `{topic}`, document `{doc}`")]
    DuplicateJudgment { line: usize, topic: String, doc: String },
    #[error("line {line}: input is not valid UTF-8")]
    InvalidUtf8 { line: usize },
    #[error("line {line}: {source}")]
    Io {
        line: usize,
        #[source]
        source: io::Error,
    },
}

impl ParseError {
    /// The 1-based line the error was detected on.
    pub fn line(&self) -> usize {
        match self {
            ParseError::Malformed { line, .. }
            | ParseError::DuplicateId { line, .. }
            | ParseError::DuplicateJudgment { line, .. }
            | ParseError::InvalidUtf8 { line }
            | ParseError::Io { line, .. } => *line,
        }
    }

    pub(crate) fn malformed(line: usize, message: impl Into<String>) -> Self {
        ParseError::Malformed {
            line,
            message: message.into(),
        }
    }
}

/// Iterates over `(line_number, line)` pairs, skipping blank lines and
/// stripping the line terminator. Non-UTF-8 input is rejected, never
/// transcoded.
pub(crate) fn lines<R: BufRead>(mut reader: R) -> impl Iterator<Item = Result<(usize, String), ParseError>> {
    let mut line_no = 0usize;
    let mut buf = Vec::new();
    let mut done = false;
    std::iter::from_fn(move || loop {
        if done {
            return None;
        }
        buf.clear();
        line_no += 1;
        match reader.read_until(b'\n', &mut buf) {
            Ok(0) => {
                done = true;
                return None;
            }
            Ok(_) => {}
            Err(source) => {
                done = true;
                return Some(Err(ParseError::Io { line: line_no, source }));
            }
        }
        if buf.last() == Some(&b'\n') {
            buf.pop();
            if buf.last() == Some(&b'\r') {
                buf.pop();
            }
        }
        if buf.is_empty() {
            continue;
        }
        return Some(match std::str::from_utf8(&buf) {
            Ok(s) => Ok((line_no, s.to_owned())),
            Err(_) => Err(ParseError::InvalidUtf8 { line: line_no }),
        });
    })
}

/// Identifiers must be non-empty and free of whitespace so they survive the
/// whitespace-separated TREC formats.
pub(crate) fn check_id(line: usize, what: &str, id: &str) -> Result<(), ParseError> {
    if id.is_empty() {
        return Err(ParseError::malformed(line, format!("empty {what} id")));
    }
    if id.chars().any(char::is_whitespace) {
        return Err(ParseError::malformed(
            line,
            format!("{what} id `{id}` contains whitespace"),
        ));
    }
    Ok(())
}

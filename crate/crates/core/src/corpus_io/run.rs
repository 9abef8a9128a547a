use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{check_id, lines, ParseError};

#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub doc_id: String,
    pub score: f64,
    /// 1-based.
    pub rank: u32,
}

/// A TREC-style run: a ranked document list per topic plus a run tag.
///
/// Topics are kept in lexicographic id order, which is also the order they
/// are written in.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunList {
    pub tag: String,
    topics: BTreeMap<String, Vec<RunEntry>>,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid run tag `{0}`")]
    InvalidTag(String),
    #[error("topic `{topic}`: expected rank {expected}, found {found}")]
    RankGap { topic: String, expected: u32, found: u32 },
    #[error("topic `{topic}`: score increases at rank {rank}")]
    ScoreIncrease { topic: String, rank: u32 },
    #[error("topic `{topic}`: non-finite score at rank {rank}")]
    NonFiniteScore { topic: String, rank: u32 },
    #[error("topic `{topic}`: document `{doc}` appears more than once")]
    DuplicateDoc { topic: String, doc: String },
    #[error("topic `{topic}`: invalid identifier `{id}`")]
    InvalidId { topic: String, id: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl RunList {
    pub fn new(tag: impl Into<String>) -> Self {
        RunList {
            tag: tag.into(),
            topics: BTreeMap::new(),
        }
    }

    /// Stores an already-ordered list for `topic`, assigning ranks 1..n.
    /// Replaces any previous list for the topic.
    pub fn insert_ranked(&mut self, topic: impl Into<String>, ranked: Vec<(String, f64)>) {
        let entries = ranked
            .into_iter()
            .enumerate()
            .map(|(i, (doc_id, score))| RunEntry {
                doc_id,
                score,
                rank: i as u32 + 1,
            })
            .collect();
        self.topics.insert(topic.into(), entries);
    }

    pub fn insert_entries(&mut self, topic: impl Into<String>, entries: Vec<RunEntry>) {
        self.topics.insert(topic.into(), entries);
    }

    pub fn topic(&self, topic: &str) -> Option<&[RunEntry]> {
        self.topics.get(topic).map(Vec::as_slice)
    }

    pub fn topics(&self) -> impl Iterator<Item = (&str, &[RunEntry])> {
        self.topics.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn topic_ids(&self) -> Vec<&str> {
        self.topics.keys().map(String::as_str).collect()
    }

    pub fn num_topics(&self) -> usize {
        self.topics.len()
    }

    /// Total number of entries across topics.
    pub fn len(&self) -> usize {
        self.topics.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Checks the run invariants: contiguous 1-based ranks, finite
    /// non-increasing scores, and unique documents within each topic.
    pub fn validate(&self) -> Result<(), RunError> {
        if self.tag.is_empty() || self.tag.chars().any(char::is_whitespace) {
            return Err(RunError::InvalidTag(self.tag.clone()));
        }
        for (topic, entries) in &self.topics {
            if topic.is_empty() || topic.chars().any(char::is_whitespace) {
                return Err(RunError::InvalidId {
                    topic: topic.clone(),
                    id: topic.clone(),
                });
            }
            let mut seen = HashSet::with_capacity(entries.len());
            let mut prev: Option<f64> = None;
            for (i, e) in entries.iter().enumerate() {
                let expected = i as u32 + 1;
                if e.rank != expected {
                    return Err(RunError::RankGap {
                        topic: topic.clone(),
                        expected,
                        found: e.rank,
                    });
                }
                if !e.score.is_finite() {
                    return Err(RunError::NonFiniteScore {
                        topic: topic.clone(),
                        rank: e.rank,
                    });
                }
                if prev.is_some_and(|p| e.score > p) {
                    return Err(RunError::ScoreIncrease {
                        topic: topic.clone(),
                        rank: e.rank,
                    });
                }
                prev = Some(e.score);
                if e.doc_id.is_empty() || e.doc_id.chars().any(char::is_whitespace) {
                    return Err(RunError::InvalidId {
                        topic: topic.clone(),
                        id: e.doc_id.clone(),
                    });
                }
                if !seen.insert(e.doc_id.as_str()) {
                    return Err(RunError::DuplicateDoc {
                        topic: topic.clone(),
                        doc: e.doc_id.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Six decimal places, '.' separator; `-0.0` is written as `0.000000`.
pub(crate) fn format_score(score: f64) -> String {
    let s = format!("{score:.6}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_owned()
    } else {
        s
    }
}

/// Writes `topicId Q0 docId rank score tag` lines. Refuses runs that break
/// the [`RunList`] invariants.
pub fn write_run<W: Write>(run: &RunList, mut sink: W) -> Result<(), RunError> {
    run.validate()?;
    for (topic, entries) in &run.topics {
        for e in entries {
            writeln!(
                sink,
                "{topic} Q0 {} {} {} {}",
                e.doc_id,
                e.rank,
                format_score(e.score),
                run.tag
            )?;
        }
    }
    sink.flush()?;
    Ok(())
}

/// Parses a six-column TREC run. Lines may appear in any order; entries are
/// sorted by rank and the run invariants are checked, reporting the line of
/// the offending entry.
pub fn parse_run<R: BufRead>(reader: R) -> Result<RunList, ParseError> {
    let mut tag: Option<String> = None;
    let mut topics: BTreeMap<String, Vec<(usize, RunEntry)>> = BTreeMap::new();
    for item in lines(reader) {
        let (line, text) = item?;
        let cols: Vec<&str> = text.split_whitespace().collect();
        if cols.is_empty() {
            continue;
        }
        if cols.len() != 6 {
            return Err(ParseError::malformed(
                line,
                format!("expected 6 whitespace-separated columns, found {}", cols.len()),
            ));
        }
        check_id(line, "topic", cols[0])?;
        check_id(line, "document", cols[2])?;
        let rank: u32 = cols[3]
            .parse()
            .map_err(|_| ParseError::malformed(line, format!("rank `{}` is not a positive integer", cols[3])))?;
        if rank == 0 {
            return Err(ParseError::malformed(line, "ranks are 1-based, found 0"));
        }
        let score: f64 = cols[4]
            .parse()
            .map_err(|_| ParseError::malformed(line, format!("score `{}` is not a number", cols[4])))?;
        if !score.is_finite() {
            return Err(ParseError::malformed(
                line,
                format!("score `{}` is not finite", cols[4]),
            ));
        }
        match &tag {
            None => tag = Some(cols[5].to_owned()),
            Some(t) if t != cols[5] => {
                return Err(ParseError::malformed(
                    line,
                    format!("run tag `{}` differs from `{t}`", cols[5]),
                ))
            }
            Some(_) => {}
        }
        topics.entry(cols[0].to_owned()).or_default().push((
            line,
            RunEntry {
                doc_id: cols[2].to_owned(),
                score,
                rank,
            },
        ));
    }

    let mut run = RunList::new(tag.unwrap_or_default());
    for (topic, mut entries) in topics {
        entries.sort_by_key(|(_, e)| e.rank);
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (i, (line, e)) in entries.iter().enumerate() {
            let expected = i as u32 + 1;
            if e.rank != expected {
                return Err(ParseError::malformed(
                    *line,
                    format!("topic `{topic}`: expected rank {expected}, found {}", e.rank),
                ));
            }
            if i > 0 && e.score > entries[i - 1].1.score {
                return Err(ParseError::malformed(
                    *line,
                    format!("topic `{topic}`: score increases at rank {}", e.rank),
                ));
            }
            if seen.insert(e.doc_id.as_str(), *line).is_some() {
                return Err(ParseError::DuplicateId {
                    line: *line,
                    id: e.doc_id.clone(),
                });
            }
        }
        run.insert_entries(topic, entries.into_iter().map(|(_, e)| e).collect());
    }
    Ok(run)
}

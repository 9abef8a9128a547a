use std::collections::HashMap;
use std::io::BufRead;

use super::{check_id, lines, ParseError};

/// Graded relevance judgments keyed by topic, then document.
///
/// Grade 0 entries are kept: they mark a document as judged non-relevant.
/// Metrics treat any grade >= 1 as relevant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QrelSet {
    topics: HashMap<String, HashMap<String, u32>>,
}

impl QrelSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false (and leaves the set unchanged) if the pair is already
    /// judged.
    pub fn insert(&mut self, topic: impl Into<String>, doc: impl Into<String>, grade: u32) -> bool {
        let judged = self.topics.entry(topic.into()).or_default();
        match judged.entry(doc.into()) {
            std::collections::hash_map::Entry::Occupied(_) => false,
            std::collections::hash_map::Entry::Vacant(v) => {
                v.insert(grade);
                true
            }
        }
    }

    pub fn grade(&self, topic: &str, doc: &str) -> Option<u32> {
        self.topics.get(topic)?.get(doc).copied()
    }

    pub fn judgments(&self, topic: &str) -> Option<&HashMap<String, u32>> {
        self.topics.get(topic)
    }

    pub fn contains_topic(&self, topic: &str) -> bool {
        self.topics.contains_key(topic)
    }

    /// Number of documents with grade >= 1 for `topic`.
    pub fn relevant_count(&self, topic: &str) -> usize {
        self.topics
            .get(topic)
            .map_or(0, |j| j.values().filter(|&&g| g >= 1).count())
    }

    /// Topic ids in lexicographic order.
    pub fn topic_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.topics.keys().map(String::as_str).collect();
        ids.sort_unstable();
        ids
    }

    pub fn len(&self) -> usize {
        self.topics.values().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Parses TREC qrels: `topicId iteration docId grade`, whitespace separated.
/// The iteration column is ignored.
pub fn parse_qrels<R: BufRead>(reader: R) -> Result<QrelSet, ParseError> {
    let mut set = QrelSet::new();
    for item in lines(reader) {
        let (line, text) = item?;
        let cols: Vec<&str> = text.split_whitespace().collect();
        if cols.is_empty() {
            continue;
        }
        if cols.len() != 4 {
            return Err(ParseError::malformed(
                line,
                format!("expected 4 whitespace-separated columns, found {}", cols.len()),
            ));
        }
        let (topic, doc) = (cols[0], cols[2]);
        check_id(line, "topic", topic)?;
        check_id(line, "document", doc)?;
        let grade: i64 = cols[3]
            .parse()
            .map_err(|_| ParseError::malformed(line, format!("grade `{}` is not an integer", cols[3])))?;
        if grade < 0 {
            return Err(ParseError::malformed(line, format!("negative grade {grade}")));
        }
        let grade =
            u32::try_from(grade).map_err(|_| ParseError::malformed(line, format!("grade {grade} out of range")))?;
        if !set.insert(topic, doc, grade) {
            return Err(ParseError::DuplicateJudgment {
                line,
                topic: topic.to_owned(),
                doc: doc.to_owned(),
            });
        }
    }
    Ok(set)
}

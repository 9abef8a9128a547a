use std::collections::HashSet;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{check_id, lines, ParseError};

/// A search topic. `title` is the short keyword form used by the
/// bag-of-words stage; `description` is the sentence-length statement of the
/// information need and may be empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub id: String,
    pub title: String,
    pub description: String,
}

impl Topic {
    pub fn new(id: impl Into<String>, title: impl Into<String>, description: impl Into<String>) -> Self {
        Topic {
            id: id.into(),
            title: title.into(),
            description: description.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopicFormat {
    /// `id \t title`
    Tsv2,
    /// `id \t title \t description`
    Tsv3,
}

impl FromStr for TopicFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tsv2" => Ok(TopicFormat::Tsv2),
            "tsv3" => Ok(TopicFormat::Tsv3),
            other => Err(format!("unknown topic format `{other}` (expected tsv2 or tsv3)")),
        }
    }
}

pub fn parse_topics<R: BufRead>(reader: R, format: TopicFormat) -> Result<Vec<Topic>, ParseError> {
    let expected = match format {
        TopicFormat::Tsv2 => 2,
        TopicFormat::Tsv3 => 3,
    };
    let mut seen = HashSet::new();
    let mut topics = Vec::new();
    for item in lines(reader) {
        let (line, text) = item?;
        let cols: Vec<&str> = text.split('\t').collect();
        if cols.len() != expected {
            return Err(ParseError::malformed(
                line,
                format!("expected {expected} tab-separated columns, found {}", cols.len()),
            ));
        }
        check_id(line, "topic", cols[0])?;
        if !seen.insert(cols[0].to_owned()) {
            return Err(ParseError::DuplicateId {
                line,
                id: cols[0].to_owned(),
            });
        }
        let description = cols.get(2).copied().unwrap_or("");
        topics.push(Topic::new(cols[0], cols[1], description));
    }
    Ok(topics)
}

use std::collections::HashMap;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{check_id, lines, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    /// `docId \t text`
    Tsv,
    /// `{"id": ..., "text": ...}` per line
    Jsonl,
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tsv" => Ok(CorpusFormat::Tsv),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(format!("unknown corpus format `{other}` (expected tsv or jsonl)")),
        }
    }
}

#[derive(Deserialize)]
struct JsonDoc {
    id: String,
    text: String,
}

/// Parses a corpus, returning documents in input order.
pub fn parse_corpus<R: BufRead>(reader: R, format: CorpusFormat) -> Result<Vec<Document>, ParseError> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut docs = Vec::new();
    for item in lines(reader) {
        let (line, text) = item?;
        let doc = match format {
            CorpusFormat::Tsv => {
                let cols: Vec<&str> = text.split('\t').collect();
                if cols.len() != 2 {
                    return Err(ParseError::malformed(
                        line,
                        format!("expected 2 tab-separated columns, found {}", cols.len()),
                    ));
                }
                Document::new(cols[0], cols[1])
            }
            CorpusFormat::Jsonl => {
                let rec: JsonDoc = serde_json::from_str(&text)
                    .map_err(|e| ParseError::malformed(line, format!("invalid JSON record: {e}")))?;
                Document::new(rec.id, rec.text)
            }
        };
        check_id(line, "document", &doc.id)?;
        if seen.insert(doc.id.clone(), line).is_some() {
            return Err(ParseError::DuplicateId { line, id: doc.id });
        }
        docs.push(doc);
    }
    Ok(docs)
}

/// Documents in input order with lookup by id.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    docs: Vec<Document>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    /// Fails with the first duplicated id.
    pub fn new(docs: Vec<Document>) -> Result<Self, String> {
        let mut by_id = HashMap::with_capacity(docs.len());
        for (i, d) in docs.iter().enumerate() {
            if by_id.insert(d.id.clone(), i).is_some() {
                return Err(d.id.clone());
            }
        }
        Ok(Corpus { docs, by_id })
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.by_id.get(id).map(|&i| &self.docs[i])
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

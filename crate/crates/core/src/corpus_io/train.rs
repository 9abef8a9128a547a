use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{lines, ParseError};
use crate::reranking::TargetWordConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

/// A query-document pair labelled relevant (positive) or not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainInstance {
    pub query: String,
    pub doc: String,
    pub label: Label,
}

impl TrainInstance {
    pub fn new(query: impl Into<String>, doc: impl Into<String>, label: Label) -> Self {
        TrainInstance {
            query: query.into(),
            doc: doc.into(),
            label,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainFormat {
    /// `query \t doc \t label`, label one of `1`/`0`, `positive`/`negative`,
    /// `true`/`false`.
    Labeled,
    /// `query \t positiveDoc \t negativeDoc`; each line yields one instance
    /// of each class.
    Triples,
}

impl FromStr for TrainFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "labeled" => Ok(TrainFormat::Labeled),
            "triples" => Ok(TrainFormat::Triples),
            other => Err(format!(
                "unknown training format `{other}` (expected labeled or triples)"
            )),
        }
    }
}

fn parse_label(s: &str) -> Option<Label> {
    match s {
        "1" | "positive" | "true" => Some(Label::Positive),
        "0" | "negative" | "false" => Some(Label::Negative),
        _ => None,
    }
}

pub fn parse_train<R: BufRead>(reader: R, format: TrainFormat) -> Result<Vec<TrainInstance>, ParseError> {
    let mut out = Vec::new();
    for item in lines(reader) {
        let (line, text) = item?;
        let cols: Vec<&str> = text.split('\t').collect();
        if cols.len() != 3 {
            return Err(ParseError::malformed(
                line,
                format!("expected 3 tab-separated columns, found {}", cols.len()),
            ));
        }
        match format {
            TrainFormat::Labeled => {
                let label = parse_label(cols[2])
                    .ok_or_else(|| ParseError::malformed(line, format!("unknown label `{}`", cols[2])))?;
                out.push(TrainInstance {
                    query: cols[0].to_owned(),
                    doc: cols[1].to_owned(),
                    label,
                });
            }
            TrainFormat::Triples => {
                out.push(TrainInstance {
                    query: cols[0].to_owned(),
                    doc: cols[1].to_owned(),
                    label: Label::Positive,
                });
                out.push(TrainInstance {
                    query: cols[0].to_owned(),
                    doc: cols[2].to_owned(),
                    label: Label::Negative,
                });
            }
        }
    }
    Ok(out)
}

/// Writes `query \t doc \t word` lines where `word` is the target word for
/// the instance's class, the input format of the fine-tuning utility.
pub fn write_train<W: Write>(instances: &[TrainInstance], target: &TargetWordConfig, mut sink: W) -> io::Result<()> {
    for inst in instances {
        if inst.query.contains(['\t', '\n']) || inst.doc.contains(['\t', '\n']) {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                "training text contains a tab or newline",
            ));
        }
        let word = match inst.label {
            Label::Positive => &target.positive,
            Label::Negative => &target.negative,
        };
        writeln!(sink, "{}\t{}\t{}", inst.query, inst.doc, word)?;
    }
    sink.flush()
}

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::porter;

const ENGLISH_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stemmer {
    None,
    #[default]
    Porter,
}

/// Text analysis settings shared by indexing and querying.
///
/// The default is lowercasing, the 33-word English stopword list and Porter
/// stemming. Stopwords are matched after lowercasing and before stemming.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyzerConfig {
    pub lowercase: bool,
    pub stopwords: HashSet<String>,
    pub stem: Stemmer,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        AnalyzerConfig {
            lowercase: true,
            stopwords: english_stopwords(),
            stem: Stemmer::Porter,
        }
    }
}

impl AnalyzerConfig {
    /// Lowercasing only: no stopwords, no stemming.
    pub fn plain() -> Self {
        AnalyzerConfig {
            lowercase: true,
            stopwords: HashSet::new(),
            stem: Stemmer::None,
        }
    }

    pub fn with_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.stopwords = words.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_stemmer(mut self, stem: Stemmer) -> Self {
        self.stem = stem;
        self
    }
}

pub fn english_stopwords() -> HashSet<String> {
    ENGLISH_STOPWORDS
        .lines()
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Splits on every non-alphanumeric character, then lowercases, drops
/// stopwords and stems according to `cfg`.
pub fn analyze(text: &str, cfg: &AnalyzerConfig) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .filter_map(|raw| {
            let token = if cfg.lowercase {
                raw.to_lowercase()
            } else {
                raw.to_owned()
            };
            if cfg.stopwords.contains(&token) {
                return None;
            }
            Some(match cfg.stem {
                Stemmer::None => token,
                Stemmer::Porter => porter::stem(&token).into_owned(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stopword_then_stem() {
        let cfg = AnalyzerConfig::plain()
            .with_stopwords(["the"])
            .with_stemmer(Stemmer::Porter);
        assert_eq!(analyze("The CATS sat", &cfg), vec!["cat", "sat"]);
    }

    #[test]
    fn empty_text() {
        assert!(analyze("", &AnalyzerConfig::default()).is_empty());
        assert!(analyze(" .,;! ", &AnalyzerConfig::default()).is_empty());
    }

    #[test]
    fn stems_without_stopwords() {
        let cfg = AnalyzerConfig::plain().with_stemmer(Stemmer::Porter);
        assert_eq!(analyze("Running quickly", &cfg), vec!["run", "quickli"]);
    }

    #[test]
    fn default_list_has_33_words() {
        let sw = english_stopwords();
        assert_eq!(sw.len(), 33);
        assert!(sw.contains("the") && sw.contains("with") && sw.contains("into"));
    }

    #[test]
    fn splits_on_unicode_punctuation_and_keeps_digits() {
        let cfg = AnalyzerConfig::plain();
        assert_eq!(
            analyze("naïve—café x2…Ünïcode", &cfg),
            vec!["naïve", "café", "x2", "ünïcode"]
        );
    }

    #[test]
    fn case_sensitive_stopwords_without_lowercasing() {
        let mut cfg = AnalyzerConfig::plain().with_stopwords(["the"]);
        cfg.lowercase = false;
        assert_eq!(analyze("The the", &cfg), vec!["The"]);
    }
}

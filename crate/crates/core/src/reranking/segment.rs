//! Sentence splitting and sliding windows over sentences.

use serde::{Deserialize, Serialize};

use super::RerankError;

/// Splits after `.`, `!` or `?` when followed by whitespace or the end of
/// the text. Sentences are trimmed and empty ones dropped; text without a
/// terminator is one sentence.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let boundary = match chars.peek() {
            None => true,
            Some(&(_, next)) => next.is_whitespace(),
        };
        if boundary {
            let end = i + c.len_utf8();
            push_trimmed(&mut out, &text[start..end]);
            start = end;
        }
    }
    push_trimmed(&mut out, &text[start..]);
    out
}

fn push_trimmed(out: &mut Vec<String>, s: &str) {
    let s = s.trim();
    if !s.is_empty() {
        out.push(s.to_owned());
    }
}

/// Window length and step, both in sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    pub size: usize,
    pub stride: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig { size: 10, stride: 5 }
    }
}

impl WindowConfig {
    pub fn new(size: usize, stride: usize) -> Result<Self, RerankError> {
        let w = WindowConfig { size, stride };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), RerankError> {
        if self.size == 0 {
            return Err(RerankError::InvalidWindow("size must be at least 1".into()));
        }
        if self.stride == 0 || self.stride > self.size {
            return Err(RerankError::InvalidWindow(format!(
                "stride must be in 1..={}, got {}",
                self.size, self.stride
            )));
        }
        Ok(())
    }
}

/// Inclusive sentence spans of the windows over `n` sentences.
///
/// Windows start at `0, stride, 2·stride, …` and stop after the first one
/// that reaches the last sentence, so a trailing window may be shorter than
/// `size`. That gives `1 + ceil(max(0, n − size) / stride)` windows for
/// `n ≥ 1` and none for `n = 0`.
pub fn window_spans(n: usize, window: WindowConfig) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    if n == 0 {
        return spans;
    }
    let mut start = 0;
    loop {
        let end = (start + window.size).min(n) - 1;
        spans.push((start, end));
        if end == n - 1 {
            return spans;
        }
        start += window.stride;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Passage {
    pub doc_id: String,
    /// 0-based position among the document's passages.
    pub index: usize,
    pub text: String,
    /// Inclusive sentence indices.
    pub sentence_span: (usize, usize),
}

/// Joins each window's sentences with single spaces.
pub fn make_passages(doc_id: &str, sentences: &[String], window: WindowConfig) -> Result<Vec<Passage>, RerankError> {
    window.validate()?;
    Ok(window_spans(sentences.len(), window)
        .into_iter()
        .enumerate()
        .map(|(index, (s, e))| Passage {
            doc_id: doc_id.to_owned(),
            index,
            text: sentences[s..=e].join(" "),
            sentence_span: (s, e),
        })
        .collect())
}

/// Sentence-splits `text` and windows it. Fails if the text is blank.
pub fn segment_document(doc_id: &str, text: &str, window: WindowConfig) -> Result<Vec<Passage>, RerankError> {
    let sentences = split_sentences(text);
    if sentences.is_empty() {
        window.validate()?;
        return Err(RerankError::EmptyDocument(doc_id.to_owned()));
    }
    make_passages(doc_id, &sentences, window)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_terminators() {
        assert_eq!(split_sentences("A. B? C!"), vec!["A.", "B?", "C!"]);
        assert_eq!(split_sentences("no terminator here"), vec!["no terminator here"]);
        assert_eq!(split_sentences("x.   y."), vec!["x.", "y."]);
    }

    #[test]
    fn terminator_inside_token_does_not_split() {
        assert_eq!(split_sentences("pi is 3.14 ok. done"), vec!["pi is 3.14 ok.", "done"]);
        assert_eq!(
            split_sentences("Wait... what?!\nYes."),
            vec!["Wait...", "what?!", "Yes."]
        );
        assert!(split_sentences("  \n ").is_empty());
        assert_eq!(split_sentences("¿Qué? Sí."), vec!["¿Qué?", "Sí."]);
    }

    #[test]
    fn spans_for_reference_lengths() {
        let w = WindowConfig::default();
        assert_eq!(window_spans(12, w), vec![(0, 9), (5, 11)]);
        assert_eq!(window_spans(3, w), vec![(0, 2)]);
        let starts: Vec<usize> = window_spans(25, w).iter().map(|s| s.0).collect();
        assert_eq!(starts, vec![0, 5, 10, 15]);
        assert!(window_spans(0, w).is_empty());
        assert_eq!(window_spans(10, w), vec![(0, 9)]);
        assert_eq!(window_spans(11, w), vec![(0, 9), (5, 10)]);
    }

    #[test]
    fn count_formula_and_coverage_exhaustive() {
        for size in 1..=12 {
            for stride in 1..=size {
                let w = WindowConfig::new(size, stride).unwrap();
                for n in 1..=200usize {
                    let spans = window_spans(n, w);
                    let expected = 1 + n.saturating_sub(size).div_ceil(stride);
                    assert_eq!(spans.len(), expected, "n={n} size={size} stride={stride}");
                    assert_eq!(spans[0].0, 0);
                    assert_eq!(spans.last().unwrap().1, n - 1);
                    let mut covered = vec![false; n];
                    for &(s, e) in &spans {
                        assert!(e - s < size);
                        covered[s..=e].iter_mut().for_each(|c| *c = true);
                    }
                    assert!(covered.iter().all(|&c| c));
                }
            }
        }
    }

    #[test]
    fn invalid_windows() {
        assert!(WindowConfig::new(0, 1).is_err());
        assert!(WindowConfig::new(5, 0).is_err());
        assert!(WindowConfig::new(5, 6).is_err());
    }

    #[test]
    fn passages_join_sentences() {
        let sentences: Vec<String> = (0..12).map(|i| format!("S{i}.")).collect();
        let p = make_passages("d", &sentences, WindowConfig::default()).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p[1].index, 1);
        assert_eq!(p[1].sentence_span, (5, 11));
        assert_eq!(p[1].text, "S5. S6. S7. S8. S9. S10. S11.");
        assert!(make_passages("d", &[], WindowConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn blank_document_is_an_error() {
        assert!(matches!(
            segment_document("d", " ", WindowConfig::default()),
            Err(RerankError::EmptyDocument(_))
        ));
    }
}

//! Generated test collection where term overlap fixes BM25 mistakes.
//!
//! Topic `i` asks for `alpha{i} beta{i}`. Its single relevant document
//! contains each term once inside ordinary filler text. `beta{i}` is also
//! sprinkled over many filler documents, so it carries little weight. For
//! the first `num_inverted` topics a short distractor repeats `alpha{i}`
//! and never mentions `beta{i}`; BM25 puts it above the answer, while any
//! scorer that rewards covering both query terms does not.
//!
//! All tokens end in a digit, so stemming and stopword removal leave them
//! alone. Expected first-stage ranks are computed by scoring every document
//! directly, without an inverted index.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::corpus_io::{Document, QrelSet, Topic};
use crate::retrieval::{analyze, idf, AnalyzerConfig, Bm25Params};
use crate::rng::{below, seeded};

const FILLER_VOCAB: usize = 400;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticConfig {
    pub num_docs: usize,
    pub num_topics: usize,
    /// Topics that get a distractor.
    pub num_inverted: usize,
    /// Filler documents mentioning each `beta{i}`.
    pub beta_docs: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            num_docs: 200,
            num_topics: 20,
            num_inverted: 12,
            beta_docs: 30,
            seed: 2020,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCollection {
    pub docs: Vec<Document>,
    pub topics: Vec<Topic>,
    pub qrels: QrelSet,
    /// Topic id to its relevant document.
    pub answers: BTreeMap<String, String>,
    /// Topic id to its distractor, for inverted topics.
    pub distractors: BTreeMap<String, String>,
    /// Rank of each answer under BM25 with default parameters and the
    /// default analyzer on the topic title, from [`brute_force_bm25`].
    pub expected_bm25_ranks: BTreeMap<String, usize>,
}

/// Paths written by [`SyntheticCollection::write_to_dir`].
#[derive(Debug, Clone)]
pub struct SyntheticFiles {
    /// `id \t text`
    pub corpus: PathBuf,
    /// `id \t title \t description`
    pub topics: PathBuf,
    pub qrels: PathBuf,
}

enum Kind {
    Filler(usize),
    Answer(usize),
    Distractor(usize),
}

fn width(n: usize) -> usize {
    n.saturating_sub(1).to_string().len()
}

fn filler_sentence(rng: &mut rand_xoshiro::SplitMix64, words: usize) -> Vec<String> {
    (0..words).map(|_| format!("w{}", below(rng, FILLER_VOCAB))).collect()
}

fn render(sentences: &[Vec<String>]) -> String {
    sentences
        .iter()
        .map(|s| format!("{}.", s.join(" ")))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Builds the collection. Fails if the document budget cannot hold the
/// answers, distractors and enough filler for the `beta` terms.
pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticCollection, String> {
    let fixed = cfg.num_topics + cfg.num_inverted;
    if cfg.num_topics == 0 {
        return Err("need at least one topic".into());
    }
    if cfg.num_inverted > cfg.num_topics {
        return Err("more inverted topics than topics".into());
    }
    if cfg.num_docs < fixed + cfg.beta_docs {
        return Err(format!(
            "{} documents cannot hold {fixed} answers and distractors plus {} filler documents",
            cfg.num_docs, cfg.beta_docs
        ));
    }
    let num_filler = cfg.num_docs - fixed;
    let mut rng = seeded(cfg.seed);

    // Shuffle document kinds over ids so answers do not sit at fixed ids.
    let mut kinds: Vec<Kind> = (0..cfg.num_topics)
        .map(Kind::Answer)
        .chain((0..cfg.num_inverted).map(Kind::Distractor))
        .chain((0..num_filler).map(Kind::Filler))
        .collect();
    for i in (1..kinds.len()).rev() {
        let j = below(&mut rng, i + 1);
        kinds.swap(i, j);
    }

    // Filler document f mentions beta{t} for a cyclic block of beta_docs
    // filler documents per topic, so every beta has the same df.
    let mut betas_of_filler: Vec<Vec<usize>> = vec![Vec::new(); num_filler];
    for t in 0..cfg.num_topics {
        let start = (t * 7) % num_filler;
        for k in 0..cfg.beta_docs {
            betas_of_filler[(start + k) % num_filler].push(t);
        }
    }

    let dw = width(cfg.num_docs);
    let tw = width(cfg.num_topics);
    let doc_id = |n: usize| format!("d{n:0dw$}");
    let topic_id = |t: usize| format!("q{t:0tw$}");

    let mut docs = Vec::with_capacity(cfg.num_docs);
    let mut answers = BTreeMap::new();
    let mut distractors = BTreeMap::new();
    for (n, kind) in kinds.iter().enumerate() {
        let id = doc_id(n);
        let text = match *kind {
            Kind::Filler(f) => {
                let count = 3 + below(&mut rng, 6);
                let mut sentences: Vec<Vec<String>> = (0..count)
                    .map(|_| {
                        let words = 4 + below(&mut rng, 6);
                        filler_sentence(&mut rng, words)
                    })
                    .collect();
                for &t in &betas_of_filler[f] {
                    let s = below(&mut rng, sentences.len());
                    let pos = below(&mut rng, sentences[s].len() + 1);
                    sentences[s].insert(pos, format!("beta{t}"));
                }
                render(&sentences)
            }
            Kind::Answer(t) => {
                // Even topics get long answers so the key sentence lands in
                // a later window.
                let (count, key) = if t % 2 == 0 { (25, 17) } else { (8, 3) };
                let mut sentences: Vec<Vec<String>> = (0..count)
                    .map(|_| {
                        let words = 5 + below(&mut rng, 4);
                        filler_sentence(&mut rng, words)
                    })
                    .collect();
                sentences[key] = vec![
                    format!("w{}", below(&mut rng, FILLER_VOCAB)),
                    format!("alpha{t}"),
                    format!("w{}", below(&mut rng, FILLER_VOCAB)),
                    format!("beta{t}"),
                ];
                answers.insert(topic_id(t), id.clone());
                render(&sentences)
            }
            Kind::Distractor(t) => {
                distractors.insert(topic_id(t), id.clone());
                let a = format!("alpha{t}");
                format!("{a} w{} {a} {a} {a}.", below(&mut rng, FILLER_VOCAB))
            }
        };
        docs.push(Document::new(id, text));
    }

    let topics: Vec<Topic> = (0..cfg.num_topics)
        .map(|t| {
            Topic::new(
                topic_id(t),
                format!("alpha{t} beta{t}"),
                format!("Which documents mention alpha{t} together with beta{t}?"),
            )
        })
        .collect();

    let mut qrels = QrelSet::new();
    for (topic, doc) in &answers {
        qrels.insert(topic.as_str(), doc.as_str(), 1);
    }
    for (topic, doc) in &distractors {
        qrels.insert(topic.as_str(), doc.as_str(), 0);
    }

    let analyzer = AnalyzerConfig::default();
    let params = Bm25Params::default();
    let mut expected_bm25_ranks = BTreeMap::new();
    for topic in &topics {
        let ranking = brute_force_bm25(&docs, &analyzer, &params, &topic.title);
        let answer = &answers[&topic.id];
        let rank = ranking
            .iter()
            .position(|(d, _)| d == answer)
            .map(|p| p + 1)
            .ok_or_else(|| format!("answer for {} has no query terms", topic.id))?;
        expected_bm25_ranks.insert(topic.id.clone(), rank);
    }

    Ok(SyntheticCollection {
        docs,
        topics,
        qrels,
        answers,
        distractors,
        expected_bm25_ranks,
    })
}

/// Scores every document against `query` straight from the BM25 formula
/// and returns those with a positive score, best first (ties by id).
pub fn brute_force_bm25(
    docs: &[Document],
    analyzer: &AnalyzerConfig,
    params: &Bm25Params,
    query: &str,
) -> Vec<(String, f64)> {
    let analyzed: Vec<Vec<String>> = docs.iter().map(|d| analyze(&d.text, analyzer)).collect();
    let n = docs.len();
    let avgdl = analyzed.iter().map(Vec::len).sum::<usize>() as f64 / n as f64;
    let terms = analyze(query, analyzer);
    let df: HashMap<&str, usize> = terms
        .iter()
        .map(|t| (t.as_str(), analyzed.iter().filter(|d| d.contains(t)).count()))
        .collect();
    let mut scored: Vec<(String, f64)> = docs
        .iter()
        .zip(&analyzed)
        .map(|(doc, tokens)| {
            let dl = tokens.len() as f64;
            let mut score = 0.0;
            for t in &terms {
                let df = df[t.as_str()];
                let tf = tokens.iter().filter(|x| *x == t).count() as f64;
                if df == 0 || tf == 0.0 {
                    continue;
                }
                let norm = params.k1 * (1.0 - params.b + params.b * dl / avgdl);
                score += idf(n, df) * tf * (params.k1 + 1.0) / (tf + norm);
            }
            (doc.id.clone(), score)
        })
        .filter(|(_, s)| *s > 0.0)
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored
}

impl SyntheticCollection {
    /// Topics whose answer BM25 does not rank first.
    pub fn inverted_topics(&self) -> Vec<&str> {
        self.expected_bm25_ranks
            .iter()
            .filter(|(_, &r)| r > 1)
            .map(|(t, _)| t.as_str())
            .collect()
    }

    /// MRR@10 of the expected BM25 ranking.
    pub fn expected_bm25_mrr(&self) -> f64 {
        let sum: f64 = self
            .expected_bm25_ranks
            .values()
            .map(|&r| if r <= 10 { 1.0 / r as f64 } else { 0.0 })
            .sum();
        sum / self.expected_bm25_ranks.len() as f64
    }

    /// Writes `corpus.tsv`, `topics.tsv` and `qrels.txt` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> io::Result<SyntheticFiles> {
        fs::create_dir_all(dir)?;
        let files = SyntheticFiles {
            corpus: dir.join("corpus.tsv"),
            topics: dir.join("topics.tsv"),
            qrels: dir.join("qrels.txt"),
        };
        let mut out = io::BufWriter::new(fs::File::create(&files.corpus)?);
        for d in &self.docs {
            writeln!(out, "{}\t{}", d.id, d.text)?;
        }
        out.flush()?;
        let mut out = io::BufWriter::new(fs::File::create(&files.topics)?);
        for t in &self.topics {
            writeln!(out, "{}\t{}\t{}", t.id, t.title, t.description)?;
        }
        out.flush()?;
        let mut out = io::BufWriter::new(fs::File::create(&files.qrels)?);
        for t in self.qrels.topic_ids() {
            let mut judged: Vec<(&String, &u32)> = self.qrels.judgments(t).into_iter().flatten().collect();
            judged.sort();
            for (doc, grade) in judged {
                writeln!(out, "{t} 0 {doc} {grade}")?;
            }
        }
        out.flush()?;
        Ok(files)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::{search, InvertedIndex};

    #[test]
    fn default_fixture_shape() {
        let c = generate(&SyntheticConfig::default()).unwrap();
        assert_eq!(c.docs.len(), 200);
        assert_eq!(c.topics.len(), 20);
        assert_eq!(c.distractors.len(), 12);
        assert!(c.inverted_topics().len() >= 10, "{:?}", c.expected_bm25_ranks);
        for t in c.inverted_topics() {
            assert!(c.distractors.contains_key(t));
        }
        assert!(c.expected_bm25_mrr() < 1.0);
    }

    #[test]
    fn deterministic() {
        let a = generate(&SyntheticConfig::default()).unwrap();
        let b = generate(&SyntheticConfig::default()).unwrap();
        assert_eq!(a.docs, b.docs);
        assert_eq!(a.expected_bm25_ranks, b.expected_bm25_ranks);
    }

    #[test]
    fn index_agrees_with_brute_force() {
        let c = generate(&SyntheticConfig::default()).unwrap();
        let index = InvertedIndex::build(&c.docs, AnalyzerConfig::default()).unwrap();
        let params = Bm25Params::default();
        for t in &c.topics {
            let fast = search(&index, &params, &t.title, 1000);
            let slow = brute_force_bm25(&c.docs, &AnalyzerConfig::default(), &params, &t.title);
            assert_eq!(fast.len(), slow.len());
            for (f, s) in fast.iter().zip(&slow) {
                assert_eq!(f.0, s.0);
                assert!((f.1 - s.1).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rejects_impossible_budgets() {
        let cfg = SyntheticConfig {
            num_docs: 40,
            ..SyntheticConfig::default()
        };
        assert!(generate(&cfg).is_err());
        let cfg = SyntheticConfig {
            num_inverted: 30,
            ..SyntheticConfig::default()
        };
        assert!(generate(&cfg).is_err());
    }
}

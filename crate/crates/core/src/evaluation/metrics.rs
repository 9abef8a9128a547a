use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use super::stats::mean;
use super::EvalError;
use crate::corpus_io::{QrelSet, RunEntry, RunList};
use crate::exec::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Mrr(usize),
    Ap,
    P(usize),
    Ndcg(usize),
}

impl Metric {
    /// MRR@10, AP, P@20 and nDCG@20.
    pub const STANDARD: [Metric; 4] = [Metric::Mrr(10), Metric::Ap, Metric::P(20), Metric::Ndcg(20)];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Mrr(_) => "mrr",
            Metric::Ap => "ap",
            Metric::P(_) => "p",
            Metric::Ndcg(_) => "ndcg",
        }
    }

    pub fn cutoff(self) -> Option<usize> {
        match self {
            Metric::Mrr(k) | Metric::P(k) | Metric::Ndcg(k) => Some(k),
            Metric::Ap => None,
        }
    }

    fn validate(self) -> Result<(), EvalError> {
        match self.cutoff() {
            Some(0) => Err(EvalError::InvalidCutoff),
            _ => Ok(()),
        }
    }

    /// Value for one topic, or `None` when the topic is left out of the
    /// aggregate.
    pub fn topic_value(self, ranking: &[RunEntry], judged: Option<&HashMap<String, u32>>) -> Option<f64> {
        let grade = |e: &RunEntry| judged.and_then(|j| j.get(&e.doc_id)).copied().unwrap_or(0);
        match self {
            Metric::Mrr(k) => Some(
                ranking
                    .iter()
                    .take(k)
                    .position(|e| grade(e) >= 1)
                    .map_or(0.0, |i| 1.0 / (i + 1) as f64),
            ),
            Metric::P(k) => Some(ranking.iter().take(k).filter(|e| grade(e) >= 1).count() as f64 / k as f64),
            Metric::Ap => {
                let r = judged.map_or(0, |j| j.values().filter(|&&g| g >= 1).count());
                if r == 0 {
                    return None;
                }
                let mut hits = 0usize;
                let mut sum = 0.0;
                for (i, e) in ranking.iter().enumerate() {
                    if grade(e) >= 1 {
                        hits += 1;
                        sum += hits as f64 / (i + 1) as f64;
                    }
                }
                Some(sum / r as f64)
            }
            Metric::Ndcg(k) => {
                let mut ideal: Vec<u32> = judged.map_or_else(Vec::new, |j| j.values().copied().collect());
                ideal.sort_unstable_by(|a, b| b.cmp(a));
                let idcg = dcg(ideal.into_iter().take(k));
                if idcg == 0.0 {
                    return None;
                }
                Some(dcg(ranking.iter().take(k).map(grade)) / idcg)
            }
        }
    }
}

fn dcg(grades: impl Iterator<Item = u32>) -> f64 {
    grades
        .enumerate()
        .map(|(i, g)| (2f64.powi(g as i32) - 1.0) / ((i + 2) as f64).log2())
        .sum()
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Mrr(k) => write!(f, "MRR@{k}"),
            Metric::Ap => write!(f, "AP"),
            Metric::P(k) => write!(f, "P@{k}"),
            Metric::Ndcg(k) => write!(f, "nDCG@{k}"),
        }
    }
}

impl FromStr for Metric {
    type Err = EvalError;

    /// Accepts `mrr@10`, `ap` (or `map`), `p@20`, `ndcg@20`, case-insensitive.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let unknown = || EvalError::UnknownMetric(s.to_owned());
        let (name, cutoff) = match lower.split_once('@') {
            Some((n, k)) => (n, Some(k.parse::<usize>().map_err(|_| unknown())?)),
            None => (lower.as_str(), None),
        };
        let m = match (name, cutoff) {
            ("mrr", Some(k)) => Metric::Mrr(k),
            ("ap" | "map", None) => Metric::Ap,
            ("p", Some(k)) => Metric::P(k),
            ("ndcg", Some(k)) => Metric::Ndcg(k),
            _ => return Err(unknown()),
        };
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub metric: Metric,
    /// Values of the topics that enter the aggregate.
    pub per_topic: BTreeMap<String, f64>,
    /// Mean of `per_topic`; 0 when it is empty.
    pub aggregate: f64,
    /// Run topics left out of the aggregate.
    pub excluded_topics: Vec<String>,
    /// Run topics with no judgments at all.
    pub unjudged_topics: Vec<String>,
}

impl MetricReport {
    pub fn num_topics(&self) -> usize {
        self.per_topic.len()
    }
}

/// Evaluates `metric` over every topic in `run`.
pub fn evaluate(metric: Metric, run: &RunList, qrels: &QrelSet, exec: Execution) -> Result<MetricReport, EvalError> {
    metric.validate()?;
    let topics: Vec<(&str, &[RunEntry])> = run.topics().collect();
    let values = exec.map(&topics, |&(t, ranking)| metric.topic_value(ranking, qrels.judgments(t)));
    let mut per_topic = BTreeMap::new();
    let mut excluded_topics = Vec::new();
    let mut unjudged_topics = Vec::new();
    for (&(t, _), v) in topics.iter().zip(values) {
        if !qrels.contains_topic(t) {
            unjudged_topics.push(t.to_owned());
        }
        match v {
            Some(v) => {
                per_topic.insert(t.to_owned(), v);
            }
            None => excluded_topics.push(t.to_owned()),
        }
    }
    let values: Vec<f64> = per_topic.values().copied().collect();
    let aggregate = if values.is_empty() { 0.0 } else { mean(&values) };
    Ok(MetricReport {
        metric,
        per_topic,
        aggregate,
        excluded_topics,
        unjudged_topics,
    })
}

pub fn evaluate_all(
    metrics: &[Metric],
    run: &RunList,
    qrels: &QrelSet,
    exec: Execution,
) -> Result<Vec<MetricReport>, EvalError> {
    metrics.iter().map(|&m| evaluate(m, run, qrels, exec)).collect()
}

pub fn mrr_at_k(run: &RunList, qrels: &QrelSet, k: usize) -> Result<MetricReport, EvalError> {
    evaluate(Metric::Mrr(k), run, qrels, Execution::Sequential)
}

pub fn average_precision(run: &RunList, qrels: &QrelSet) -> MetricReport {
    evaluate(Metric::Ap, run, qrels, Execution::Sequential).expect("AP has no cutoff to validate")
}

pub fn precision_at_k(run: &RunList, qrels: &QrelSet, k: usize) -> Result<MetricReport, EvalError> {
    evaluate(Metric::P(k), run, qrels, Execution::Sequential)
}

pub fn ndcg_at_k(run: &RunList, qrels: &QrelSet, k: usize) -> Result<MetricReport, EvalError> {
    evaluate(Metric::Ndcg(k), run, qrels, Execution::Sequential)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn run_of(topic: &str, docs: &[&str]) -> RunList {
        let mut run = RunList::new("t");
        run.insert_ranked(
            topic,
            docs.iter()
                .enumerate()
                .map(|(i, d)| (d.to_string(), 100.0 - i as f64))
                .collect(),
        );
        run
    }

    fn qrels(entries: &[(&str, &str, u32)]) -> QrelSet {
        let mut q = QrelSet::new();
        for &(t, d, g) in entries {
            q.insert(t, d, g);
        }
        q
    }

    const TOL: f64 = 1e-12;

    #[test]
    fn mrr_examples() {
        let q = qrels(&[("1", "c", 1)]);
        let r = mrr_at_k(&run_of("1", &["a", "b", "c"]), &q, 10).unwrap();
        assert!((r.aggregate - 1.0 / 3.0).abs() < TOL);
        let late: Vec<String> = (0..11).map(|i| format!("x{i}")).collect();
        let mut docs: Vec<&str> = late.iter().map(String::as_str).collect();
        docs.push("c");
        assert_eq!(mrr_at_k(&run_of("1", &docs), &q, 10).unwrap().aggregate, 0.0);
        assert!(mrr_at_k(&run_of("1", &["c"]), &q, 0).is_err());
    }

    #[test]
    fn unjudged_topics_count_as_zero_for_mrr() {
        let mut run = run_of("1", &["c"]);
        run.insert_ranked("2", vec![("c".into(), 1.0)]);
        let r = mrr_at_k(&run, &qrels(&[("1", "c", 1)]), 10).unwrap();
        assert_eq!(r.aggregate, 0.5);
        assert_eq!(r.unjudged_topics, vec!["2"]);
        assert!(r.excluded_topics.is_empty());
    }

    #[test]
    fn ap_examples() {
        let q = qrels(&[("1", "a", 1), ("1", "d", 1)]);
        let r = average_precision(&run_of("1", &["a", "b", "c", "d"]), &q);
        assert!((r.aggregate - 0.75).abs() < TOL);
        let q3 = qrels(&[("1", "x", 1), ("1", "y", 1), ("1", "z", 2)]);
        assert_eq!(average_precision(&run_of("1", &["a"]), &q3).aggregate, 0.0);
        let none = qrels(&[("1", "a", 0)]);
        let r = average_precision(&run_of("1", &["a"]), &none);
        assert_eq!(r.excluded_topics, vec!["1"]);
        assert_eq!(r.num_topics(), 0);
    }

    #[test]
    fn precision_pads_short_runs() {
        let q = qrels(&[("1", "a", 1), ("1", "b", 1)]);
        assert_eq!(
            precision_at_k(&run_of("1", &["a", "b"]), &q, 20).unwrap().aggregate,
            0.1
        );
        assert_eq!(precision_at_k(&run_of("1", &["a", "b"]), &q, 1).unwrap().aggregate, 1.0);
    }

    #[test]
    fn ndcg_graded_example() {
        let q = qrels(&[("1", "d1", 2), ("1", "d2", 1)]);
        let r = ndcg_at_k(&run_of("1", &["d2", "d1"]), &q, 20).unwrap();
        let dcg = 1.0 + 3.0 / 3f64.log2();
        let idcg = 3.0 + 1.0 / 3f64.log2();
        assert!((dcg - 2.8928).abs() < 1e-4 && (idcg - 3.6309).abs() < 1e-4);
        assert!((r.aggregate - dcg / idcg).abs() < TOL);
        assert!((r.aggregate - 0.7967).abs() < 1e-4);
        assert_eq!(ndcg_at_k(&run_of("1", &["d1", "d2"]), &q, 20).unwrap().aggregate, 1.0);
    }

    #[test]
    fn metric_names_round_trip() {
        for m in Metric::STANDARD {
            assert_eq!(m.to_string().parse::<Metric>().unwrap(), m);
        }
        assert_eq!("MAP".parse::<Metric>().unwrap(), Metric::Ap);
        assert!("ndcg@0".parse::<Metric>().is_err());
        assert!("ap@5".parse::<Metric>().is_err());
        assert!("recall@5".parse::<Metric>().is_err());
    }

    proptest! {
        #[test]
        fn values_in_unit_interval_and_modes_agree(
            grades in proptest::collection::vec(0u32..3, 1..15),
            order in proptest::collection::vec(0usize..15, 0..15),
        ) {
            let mut q = QrelSet::new();
            for (i, g) in grades.iter().enumerate() {
                q.insert("t", format!("d{i}"), *g);
            }
            let mut seen = std::collections::HashSet::new();
            let docs: Vec<String> = order.into_iter().filter(|d| seen.insert(*d)).map(|d| format!("d{d}")).collect();
            let refs: Vec<&str> = docs.iter().map(String::as_str).collect();
            let run = run_of("t", &refs);
            for m in Metric::STANDARD {
                let a = evaluate(m, &run, &q, Execution::Sequential).unwrap();
                let b = evaluate(m, &run, &q, Execution::Parallel).unwrap();
                prop_assert_eq!(&a, &b);
                for v in a.per_topic.values() {
                    prop_assert!((0.0..=1.0 + 1e-12).contains(v));
                }
            }
        }
    }
}

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::metrics::MetricReport;
use super::stats::{bonferroni_adjust, paired_t_test, TTestResult};
use super::EvalError;

/// Writes `topic \t value` lines in topic order, values with six decimals.
pub fn write_report_tsv<W: Write>(report: &MetricReport, mut sink: W) -> io::Result<()> {
    for (topic, v) in &report.per_topic {
        writeln!(sink, "{topic}\t{v:.6}")?;
    }
    sink.flush()
}

/// JSON-facing summary of a [`MetricReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportSummary {
    pub metric: String,
    pub cutoff: Option<usize>,
    pub aggregate: f64,
    pub n_topics: usize,
    pub excluded_topics: Vec<String>,
    pub unjudged_topics: Vec<String>,
}

impl From<&MetricReport> for ReportSummary {
    fn from(r: &MetricReport) -> Self {
        ReportSummary {
            metric: r.metric.name().to_owned(),
            cutoff: r.metric.cutoff(),
            aggregate: r.aggregate,
            n_topics: r.num_topics(),
            excluded_topics: r.excluded_topics.clone(),
            unjudged_topics: r.unjudged_topics.clone(),
        }
    }
}

/// Significance of a candidate run over a baseline on one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Comparison {
    pub metric: String,
    pub cutoff: Option<usize>,
    pub baseline: f64,
    pub candidate: f64,
    pub n_topics: usize,
    /// Candidate minus baseline, so positive means the candidate is better.
    pub t: f64,
    pub df: usize,
    pub p: f64,
    pub p_bonferroni: f64,
    pub comparisons: usize,
}

/// Paired t-test of `candidate` against `baseline`, with the p-value
/// Bonferroni-adjusted for `comparisons` tests.
pub fn compare_reports(
    baseline: &MetricReport,
    candidate: &MetricReport,
    comparisons: usize,
) -> Result<Comparison, EvalError> {
    if baseline.metric != candidate.metric {
        return Err(EvalError::MetricMismatch(
            baseline.metric.to_string(),
            candidate.metric.to_string(),
        ));
    }
    let TTestResult { t, df, p, n, .. } = paired_t_test(&candidate.per_topic, &baseline.per_topic)?;
    Ok(Comparison {
        metric: baseline.metric.name().to_owned(),
        cutoff: baseline.metric.cutoff(),
        baseline: baseline.aggregate,
        candidate: candidate.aggregate,
        n_topics: n,
        t,
        df,
        p,
        p_bonferroni: bonferroni_adjust(p, comparisons)?,
        comparisons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::{QrelSet, RunList};
    use crate::evaluation::{evaluate, Metric};
    use crate::Execution;

    fn setup() -> (RunList, RunList, QrelSet) {
        let mut q = QrelSet::new();
        let mut a = RunList::new("a");
        let mut b = RunList::new("b");
        for t in 0..4 {
            let topic = format!("q{t}");
            q.insert(&topic, "good", 1);
            let bad_first = vec![("bad".to_owned(), 2.0), ("good".to_owned(), 1.0)];
            let good_first = vec![("good".to_owned(), 2.0), ("bad".to_owned(), 1.0)];
            a.insert_ranked(&topic, bad_first.clone());
            b.insert_ranked(&topic, if t == 0 { bad_first } else { good_first });
        }
        (a, b, q)
    }

    #[test]
    fn tsv_and_summary() {
        let (a, _, q) = setup();
        let r = evaluate(Metric::Mrr(10), &a, &q, Execution::Sequential).unwrap();
        let mut buf = Vec::new();
        write_report_tsv(&r, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "q0\t0.500000\nq1\t0.500000\nq2\t0.500000\nq3\t0.500000\n"
        );
        let json = serde_json::to_value(ReportSummary::from(&r)).unwrap();
        assert_eq!(json["metric"], "mrr");
        assert_eq!(json["cutoff"], 10);
        assert_eq!(json["nTopics"], 4);
        assert!(json["excludedTopics"].as_array().unwrap().is_empty());
    }

    #[test]
    fn comparison_direction() {
        let (a, b, q) = setup();
        let ra = evaluate(Metric::Mrr(10), &a, &q, Execution::Sequential).unwrap();
        let rb = evaluate(Metric::Mrr(10), &b, &q, Execution::Sequential).unwrap();
        let c = compare_reports(&ra, &rb, 3).unwrap();
        assert!(c.t > 0.0);
        assert!((c.p_bonferroni - (c.p * 3.0).min(1.0)).abs() < 1e-15);
        let ap = evaluate(Metric::Ap, &a, &q, Execution::Sequential).unwrap();
        assert!(compare_reports(&ra, &ap, 1).is_err());
    }
}

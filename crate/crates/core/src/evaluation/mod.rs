//! Ranking metrics and significance testing.
//!
//! Metrics read ranks, never scores. A document counts as relevant when
//! its grade is at least 1. Topics come from the run: a run topic without
//! judgments scores 0 for MRR and precision and is listed in
//! [`MetricReport::unjudged_topics`]. AP and nDCG skip topics with no
//! relevant documents and list them in [`MetricReport::excluded_topics`].

mod metrics;
mod report;
mod stats;

use thiserror::Error;

pub use metrics::{
    average_precision, evaluate, evaluate_all, mrr_at_k, ndcg_at_k, precision_at_k, Metric, MetricReport,
};
pub use report::{compare_reports, write_report_tsv, Comparison, ReportSummary};
pub use stats::{
    bonferroni_adjust, mean, mean_ci95, paired_t_test, paired_t_test_values, student_t_cdf, student_t_quantile,
    TTestResult,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cutoff must be at least 1")]
    InvalidCutoff,
    #[error("unknown metric `{0}` (expected mrr@K, ap, p@K or ndcg@K)")]
    UnknownMetric(String),
    #[error("topic sets differ: {only_a} only in the first, {only_b} only in the second (e.g. `{example}`)")]
    MismatchedTopics {
        only_a: usize,
        only_b: usize,
        example: String,
    },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("number of comparisons must be at least 1")]
    NoComparisons,
    #[error("p-value must be in [0, 1], got {0}")]
    InvalidP(f64),
    #[error("non-finite sample value")]
    NonFinite,
    #[error("cannot compare {0} against {1}")]
    MetricMismatch(String, String),
}

use std::collections::HashSet;
use std::io::{self, Write};

use serde::Serialize;

use super::pipeline::PreparedPipeline;
use super::sampling::sample_balanced;
use super::{BoxError, OrchestrationError};
use crate::corpus_io::TrainInstance;
use crate::evaluation::{evaluate, mean_ci95, Metric};
use crate::exec::Execution;
use crate::reranking::{Scorer, TargetWordConfig};

/// A named target-word pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbingConfig {
    pub name: String,
    pub target: TargetWordConfig,
}

impl ProbingConfig {
    fn new(name: &str, positive: &str, negative: &str) -> Self {
        ProbingConfig {
            name: name.to_owned(),
            target: TargetWordConfig {
                positive: positive.to_owned(),
                negative: negative.to_owned(),
            },
        }
    }
}

/// The six target-word configurations, baseline first.
pub fn probing_suite() -> Vec<ProbingConfig> {
    vec![
        ProbingConfig::new("Baseline", "true", "false"),
        ProbingConfig::new("Reverse", "false", "true"),
        ProbingConfig::new("Antonyms", "hot", "cold"),
        ProbingConfig::new("RelatedWords", "apple", "orange"),
        ProbingConfig::new("UnrelatedWords", "hot", "orange"),
        ProbingConfig::new("Subwords", "\u{2581}ab", "\u{2581}de"),
    ]
}

/// Supplies the scorer for one trial. A provider backed by a trainable
/// model would fine-tune on `training` with the config's target words.
pub trait ScorerProvider: Sync {
    fn scorer<'a>(
        &'a self,
        config: &ProbingConfig,
        training: &[TrainInstance],
        seed: u64,
    ) -> Result<Box<dyn Scorer + 'a>, BoxError>;
}

/// Uses the same scorer for every config and trial.
#[derive(Debug)]
pub struct FixedScorer<S>(pub S);

impl<S: Scorer> ScorerProvider for FixedScorer<S> {
    fn scorer<'a>(&'a self, _: &ProbingConfig, _: &[TrainInstance], _: u64) -> Result<Box<dyn Scorer + 'a>, BoxError> {
        Ok(Box::new(&self.0))
    }
}

#[derive(Debug, Clone)]
pub struct SamplerParams {
    pub pool: Vec<TrainInstance>,
    pub n_pos: usize,
    pub n_neg: usize,
}

#[derive(Debug, Clone)]
pub struct ProbingParams {
    pub trials: usize,
    pub metric: Metric,
    /// Training sample drawn per trial; `None` passes an empty sample.
    pub sampler: Option<SamplerParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbingRow {
    pub name: String,
    pub target: TargetWordConfig,
    /// Aggregate metric per trial.
    pub values: Vec<f64>,
    pub mean: f64,
    /// 95% half-width; `None` with a single trial.
    pub ci95: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbingReport {
    pub metric: String,
    pub trials: usize,
    pub base_seed: u64,
    /// Pipeline executions performed (configs × trials).
    pub executions: usize,
    pub rows: Vec<ProbingRow>,
}

/// Reranks and evaluates the prepared first stage once per config and
/// trial. Trial `i` uses seed `base + i` for sampling and for the scorer.
/// Any failed trial aborts the whole suite.
pub fn run_probing(
    prepared: &PreparedPipeline,
    suite: &[ProbingConfig],
    params: &ProbingParams,
    provider: &dyn ScorerProvider,
    exec: Execution,
) -> Result<ProbingReport, OrchestrationError> {
    if params.trials == 0 {
        return Err(OrchestrationError::Config("trials must be at least 1".into()));
    }
    let mut names = HashSet::new();
    for c in suite {
        if !names.insert(c.name.as_str()) {
            return Err(OrchestrationError::Config(format!(
                "duplicate probing config `{}`",
                c.name
            )));
        }
        c.target
            .validate()
            .map_err(|e| OrchestrationError::Config(format!("{}: {e}", c.name)))?;
    }
    let qrels = prepared
        .qrels
        .as_ref()
        .ok_or_else(|| OrchestrationError::Config("probing needs qrels".into()))?;
    let base_seed = prepared.config.seed;
    let mut executions = 0;
    let mut rows = Vec::with_capacity(suite.len());
    for config in suite {
        let mut values = Vec::with_capacity(params.trials);
        for trial in 0..params.trials {
            let seed = base_seed.wrapping_add(trial as u64);
            let training = match &params.sampler {
                Some(s) => sample_balanced(&s.pool, s.n_pos, s.n_neg, seed)?,
                None => Vec::new(),
            };
            let scorer = provider
                .scorer(config, &training, seed)
                .map_err(|e| OrchestrationError::stage("probe", format!("{} trial {trial}: {e}", config.name)))?;
            let reranked = prepared.rerank(scorer.as_ref(), &config.target, exec)?;
            let report = evaluate(params.metric, &reranked, qrels, exec)
                .map_err(|e| OrchestrationError::stage("evaluate", e))?;
            executions += 1;
            values.push(report.aggregate);
        }
        let (mean, ci95) = if values.len() >= 2 {
            let (m, h) = mean_ci95(&values).map_err(|e| OrchestrationError::stage("probe", e))?;
            (m, Some(h))
        } else {
            (values[0], None)
        };
        rows.push(ProbingRow {
            name: config.name.clone(),
            target: config.target.clone(),
            values,
            mean,
            ci95,
        });
    }
    Ok(ProbingReport {
        metric: params.metric.to_string(),
        trials: params.trials,
        base_seed,
        executions,
        rows,
    })
}

/// Tab-separated table, one row per config in suite order. A missing
/// interval is written as `n/a`.
pub fn write_probing_tsv<W: Write>(report: &ProbingReport, mut sink: W) -> io::Result<()> {
    writeln!(sink, "config\tpositive\tnegative\tmetric\tmean\tci95\ttrials")?;
    for r in &report.rows {
        let ci = r.ci95.map_or_else(|| "n/a".to_owned(), |h| format!("{h:.6}"));
        writeln!(
            sink,
            "{}\t{}\t{}\t{}\t{:.6}\t{ci}\t{}",
            r.name, r.target.positive, r.target.negative, report.metric, r.mean, report.trials
        )?;
    }
    sink.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_matches_reference_table() {
        let s = probing_suite();
        assert_eq!(s.len(), 6);
        let pairs: Vec<(&str, &str, &str)> = s
            .iter()
            .map(|c| (c.name.as_str(), c.target.positive.as_str(), c.target.negative.as_str()))
            .collect();
        assert_eq!(
            pairs,
            vec![
                ("Baseline", "true", "false"),
                ("Reverse", "false", "true"),
                ("Antonyms", "hot", "cold"),
                ("RelatedWords", "apple", "orange"),
                ("UnrelatedWords", "hot", "orange"),
                ("Subwords", "▁ab", "▁de"),
            ]
        );
        for c in &s {
            c.target.validate().unwrap();
        }
    }

    #[test]
    fn tsv_marks_missing_interval() {
        let report = ProbingReport {
            metric: "MRR@10".into(),
            trials: 1,
            base_seed: 0,
            executions: 1,
            rows: vec![ProbingRow {
                name: "Baseline".into(),
                target: TargetWordConfig::default(),
                values: vec![0.5],
                mean: 0.5,
                ci95: None,
            }],
        };
        let mut buf = Vec::new();
        write_probing_tsv(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "Baseline\ttrue\tfalse\tMRR@10\t0.500000\tn/a\t1"
        );
    }
}

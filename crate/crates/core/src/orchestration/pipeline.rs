use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::json;

use super::config::{FirstStage, PipelineConfig, ScorerConfig};
use super::OrchestrationError;
use crate::corpus_io::{
    parse_corpus, parse_qrels, parse_topics, write_run, Corpus, ParseError, QrelSet, RunList, Topic,
};
use crate::evaluation::{
    compare_reports, evaluate_all, write_report_tsv, Comparison, Metric, MetricReport, ReportSummary,
};
use crate::exec::Execution;
use crate::reranking::{rerank_run, OverlapScorer, RemoteScorer, Scorer, TargetWordConfig};
use crate::retrieval::{expand_search_batch, read_index, search_batch, AnalyzerConfig, InvertedIndex};

pub const FIRST_STAGE_TAG: &str = "firststage";
pub const RERANKED_TAG: &str = "seqrank";

/// Parsed inputs of a run.
#[derive(Debug, Clone)]
pub struct PipelineInputs {
    pub corpus: Corpus,
    pub topics: Vec<Topic>,
    pub qrels: Option<QrelSet>,
}

fn open(path: &Path) -> Result<BufReader<File>, OrchestrationError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| OrchestrationError::Io {
            path: path.to_owned(),
            source,
        })
}

fn parse_file<T>(
    path: &Path,
    parse: impl FnOnce(BufReader<File>) -> Result<T, ParseError>,
) -> Result<T, OrchestrationError> {
    let reader = open(path)?;
    parse(reader).map_err(|e| OrchestrationError::stage("load", format!("{}: {e}", path.display())))
}

/// Validates `cfg` and parses the corpus, topics and (when evaluating)
/// qrels it names.
pub fn load_inputs(cfg: &PipelineConfig) -> Result<PipelineInputs, OrchestrationError> {
    cfg.validate()?;
    let corpus_path = cfg.corpus.as_deref().expect("validated");
    let docs = parse_file(corpus_path, |r| parse_corpus(r, cfg.corpus_format))?;
    let corpus = Corpus::new(docs).map_err(|e| OrchestrationError::stage("load", e))?;
    let topics = parse_file(cfg.topics.as_deref().expect("validated"), |r| {
        parse_topics(r, cfg.topics_format)
    })?;
    let qrels = match (&cfg.qrels, cfg.evaluate) {
        (Some(path), true) => Some(parse_file(path, parse_qrels)?),
        _ => None,
    };
    Ok(PipelineInputs { corpus, topics, qrels })
}

pub fn build_scorer(cfg: &ScorerConfig) -> Result<Box<dyn Scorer>, OrchestrationError> {
    Ok(match cfg {
        ScorerConfig::Overlap => Box::new(OverlapScorer::new(AnalyzerConfig::default())),
        ScorerConfig::Remote(remote) => {
            Box::new(RemoteScorer::new(remote.clone()).map_err(|e| OrchestrationError::Config(e.to_string()))?)
        }
    })
}

/// Index and first-stage run, ready to be reranked any number of times.
#[derive(Debug)]
pub struct PreparedPipeline {
    pub config: PipelineConfig,
    pub corpus: Corpus,
    pub topics: Vec<Topic>,
    pub qrels: Option<QrelSet>,
    pub index: InvertedIndex,
    pub first_stage: RunList,
    rerank_queries: HashMap<String, String>,
}

/// Builds (or loads) the index and runs the first stage on topic titles.
pub fn prepare(
    cfg: &PipelineConfig,
    inputs: PipelineInputs,
    exec: Execution,
) -> Result<PreparedPipeline, OrchestrationError> {
    cfg.validate()?;
    let index = match &cfg.index {
        Some(path) => read_index(open(path)?).map_err(|e| OrchestrationError::stage("index", e))?,
        None => InvertedIndex::build_with(inputs.corpus.docs(), AnalyzerConfig::default(), exec)
            .map_err(|e| OrchestrationError::stage("index", e))?,
    };
    let queries: Vec<(String, String)> = inputs.topics.iter().map(|t| (t.id.clone(), t.title.clone())).collect();
    let first_stage = match cfg.first_stage {
        FirstStage::Bm25 => search_batch(&index, &cfg.bm25, &queries, cfg.k, FIRST_STAGE_TAG, exec),
        FirstStage::Bm25Rm3 => expand_search_batch(&index, &cfg.bm25, &cfg.rm3, &queries, cfg.k, FIRST_STAGE_TAG, exec)
            .map_err(|e| OrchestrationError::stage("first-stage", e))?,
    };
    let rerank_queries = inputs
        .topics
        .iter()
        .map(|t| (t.id.clone(), cfg.query_field.select(t).to_owned()))
        .collect();
    Ok(PreparedPipeline {
        config: cfg.clone(),
        corpus: inputs.corpus,
        topics: inputs.topics,
        qrels: inputs.qrels,
        index,
        first_stage,
        rerank_queries,
    })
}

/// Metric reports for both runs and per-metric significance tests of the
/// reranked run against the first stage.
#[derive(Debug, Clone)]
pub struct EvaluationSummary {
    pub first_stage: Vec<MetricReport>,
    pub reranked: Vec<MetricReport>,
    /// One entry per metric with at least two evaluated topics.
    pub comparisons: Vec<Comparison>,
}

impl EvaluationSummary {
    pub fn to_json(&self) -> serde_json::Value {
        let summaries = |rs: &[MetricReport]| rs.iter().map(ReportSummary::from).collect::<Vec<_>>();
        json!({
            FIRST_STAGE_TAG: summaries(&self.first_stage),
            RERANKED_TAG: summaries(&self.reranked),
            "comparisons": self.comparisons,
        })
    }
}

impl PreparedPipeline {
    pub fn rerank(
        &self,
        scorer: &dyn Scorer,
        target: &TargetWordConfig,
        exec: Execution,
    ) -> Result<RunList, OrchestrationError> {
        rerank_run(
            &self.first_stage,
            &self.rerank_queries,
            &self.corpus,
            scorer,
            target,
            self.config.window,
            None,
            RERANKED_TAG,
            exec,
        )
        .map_err(|e| OrchestrationError::stage("rerank", e))
    }

    /// Evaluates both runs with the standard metrics. Each metric is one
    /// comparison, so no Bonferroni factor is applied here.
    pub fn evaluate(
        &self,
        reranked: &RunList,
        exec: Execution,
    ) -> Result<Option<EvaluationSummary>, OrchestrationError> {
        let Some(qrels) = &self.qrels else {
            return Ok(None);
        };
        let stage = |e| OrchestrationError::stage("evaluate", e);
        let first_stage = evaluate_all(&Metric::STANDARD, &self.first_stage, qrels, exec).map_err(stage)?;
        let reranked = evaluate_all(&Metric::STANDARD, reranked, qrels, exec).map_err(stage)?;
        let mut comparisons = Vec::new();
        for (base, cand) in first_stage.iter().zip(&reranked) {
            if base.num_topics() >= 2 {
                comparisons.push(compare_reports(base, cand, 1).map_err(stage)?);
            }
        }
        Ok(Some(EvaluationSummary {
            first_stage,
            reranked,
            comparisons,
        }))
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub first_stage: RunList,
    pub reranked: RunList,
    pub evaluation: Option<EvaluationSummary>,
    /// Files written, in order.
    pub files: Vec<PathBuf>,
}

/// File-name stem for a metric, e.g. `mrr10` or `ap`.
pub fn metric_file_stem(m: Metric) -> String {
    match m.cutoff() {
        Some(k) => format!("{}{k}", m.name()),
        None => m.name().to_owned(),
    }
}

fn write_file(
    path: PathBuf,
    written: &mut Vec<PathBuf>,
    body: impl FnOnce(&mut BufWriter<File>) -> Result<(), Box<dyn std::error::Error + Send + Sync>>,
) -> Result<(), OrchestrationError> {
    let file = File::create(&path).map_err(|source| OrchestrationError::Io {
        path: path.clone(),
        source,
    })?;
    written.push(path.clone());
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush().map_err(Into::into))
        .map_err(|e| OrchestrationError::stage("write", format!("{}: {e}", path.display())))
}

/// Writes runs, the resolved config, per-topic metric TSVs and
/// `summary.json` into `cfg.output_dir`. On failure every file written so
/// far is removed.
pub fn write_outputs(
    cfg: &PipelineConfig,
    first_stage: &RunList,
    reranked: &RunList,
    evaluation: Option<&EvaluationSummary>,
) -> Result<Vec<PathBuf>, OrchestrationError> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|source| OrchestrationError::Io {
        path: dir.clone(),
        source,
    })?;
    let mut written = Vec::new();
    let result = (|| {
        write_file(dir.join(format!("{FIRST_STAGE_TAG}.run")), &mut written, |w| {
            Ok(write_run(first_stage, w)?)
        })?;
        write_file(dir.join(format!("{RERANKED_TAG}.run")), &mut written, |w| {
            Ok(write_run(reranked, w)?)
        })?;
        write_file(dir.join("config.toml"), &mut written, |w| {
            Ok(w.write_all(cfg.to_toml_string().as_bytes())?)
        })?;
        if let Some(eval) = evaluation {
            for (tag, reports) in [(FIRST_STAGE_TAG, &eval.first_stage), (RERANKED_TAG, &eval.reranked)] {
                for r in reports {
                    let name = format!("{tag}.{}.tsv", metric_file_stem(r.metric));
                    write_file(dir.join(name), &mut written, |w| Ok(write_report_tsv(r, w)?))?;
                }
            }
            write_file(dir.join("summary.json"), &mut written, |w| {
                serde_json::to_writer_pretty(&mut *w, &eval.to_json())?;
                Ok(w.write_all(b"\n")?)
            })?;
        }
        Ok(())
    })();
    match result {
        Ok(()) => Ok(written),
        Err(e) => {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            Err(e)
        }
    }
}

/// Runs every stage in memory, then writes the outputs.
pub fn run_pipeline(cfg: &PipelineConfig, exec: Execution) -> Result<PipelineOutput, OrchestrationError> {
    cfg.validate()?;
    let scorer = build_scorer(&cfg.scorer)?;
    let inputs = load_inputs(cfg)?;
    let prepared = prepare(cfg, inputs, exec)?;
    let reranked = prepared.rerank(scorer.as_ref(), &cfg.target, exec)?;
    let evaluation = prepared.evaluate(&reranked, exec)?;
    let files = write_outputs(cfg, &prepared.first_stage, &reranked, evaluation.as_ref())?;
    Ok(PipelineOutput {
        first_stage: prepared.first_stage,
        reranked,
        evaluation,
        files,
    })
}

//! `seqrank` command-line interface.
//!
//! Exit status: 0 on success, 1 on usage or configuration errors, 2 on
//! runtime errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use seqrank::corpus_io::{CorpusFormat, TopicFormat, TrainFormat};
use seqrank::orchestration::{FirstStage, QueryField};

#[derive(Debug, Parser)]
#[command(
    name = "seqrank",
    version,
    about = "Multi-stage document ranking: BM25/RM3 retrieval, target-word reranking, evaluation"
)]
pub struct Cli {
    /// Seed for sampling and probing trials (overrides the config file).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML file with pipeline settings; command-line flags take precedence.
    #[arg(long, global = true, value_name = "TOML")]
    pub config: Option<PathBuf>,
    /// Directory for outputs that are not given an explicit path.
    #[arg(long, global = true, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an inverted index from a corpus.
    Index(IndexArgs),
    /// BM25 retrieval for a topic file.
    Search(SearchArgs),
    /// BM25 retrieval with RM3 query expansion.
    ExpandSearch(ExpandArgs),
    /// Rerank a run with a relevance scorer.
    Rerank(RerankArgs),
    /// Compute MRR@10, AP, P@20 and nDCG@20 (or chosen metrics) for a run.
    Evaluate(EvaluateArgs),
    /// Paired t-tests of a candidate run against one or more baselines.
    Compare(CompareArgs),
    /// Draw a class-balanced training sample.
    Sample(SampleArgs),
    /// Run the target-word probing suite.
    Probe(ProbeArgs),
    /// Index, retrieve, rerank and evaluate in one go.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CorpusFmt {
    Tsv,
    Jsonl,
}

impl From<CorpusFmt> for CorpusFormat {
    fn from(f: CorpusFmt) -> Self {
        match f {
            CorpusFmt::Tsv => CorpusFormat::Tsv,
            CorpusFmt::Jsonl => CorpusFormat::Jsonl,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TopicsFmt {
    Tsv2,
    Tsv3,
}

impl From<TopicsFmt> for TopicFormat {
    fn from(f: TopicsFmt) -> Self {
        match f {
            TopicsFmt::Tsv2 => TopicFormat::Tsv2,
            TopicsFmt::Tsv3 => TopicFormat::Tsv3,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TrainFmt {
    Labeled,
    Triples,
}

impl From<TrainFmt> for TrainFormat {
    fn from(f: TrainFmt) -> Self {
        match f {
            TrainFmt::Labeled => TrainFormat::Labeled,
            TrainFmt::Triples => TrainFormat::Triples,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Field {
    Title,
    Description,
    Auto,
}

impl From<Field> for QueryField {
    fn from(f: Field) -> Self {
        match f {
            Field::Title => QueryField::Title,
            Field::Description => QueryField::Description,
            Field::Auto => QueryField::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Stage {
    Bm25,
    Bm25Rm3,
}

impl From<Stage> for FirstStage {
    fn from(s: Stage) -> Self {
        match s {
            Stage::Bm25 => FirstStage::Bm25,
            Stage::Bm25Rm3 => FirstStage::Bm25Rm3,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScorerKind {
    Overlap,
    Remote,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub corpus_format: Option<CorpusFmt>,
}

#[derive(Debug, Args)]
pub struct TopicArgs {
    #[arg(long)]
    pub topics: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub topics_format: Option<TopicsFmt>,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Output file [default: <output-dir>/index.srix].
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Keep stopwords.
    #[arg(long)]
    pub no_stopwords: bool,
    /// Disable Porter stemming.
    #[arg(long)]
    pub no_stem: bool,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[command(flatten)]
    pub topics: TopicArgs,
    /// Documents per topic.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub k1: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long, default_value = "bm25")]
    pub tag: String,
    /// Run file [default: <output-dir>/<tag>.run].
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long)]
    pub fb_docs: Option<usize>,
    #[arg(long)]
    pub fb_terms: Option<usize>,
    #[arg(long)]
    pub original_weight: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScorerArgs {
    #[arg(long, value_enum)]
    pub scorer: Option<ScorerKind>,
    /// Inference service base URL (remote scorer).
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub timeout_secs: Option<f64>,
    #[arg(long)]
    pub retries: Option<usize>,
    #[arg(long)]
    pub positive: Option<String>,
    #[arg(long)]
    pub negative: Option<String>,
    #[arg(long)]
    pub window_size: Option<usize>,
    #[arg(long)]
    pub window_stride: Option<usize>,
    #[arg(long, value_enum)]
    pub query_field: Option<Field>,
}

#[derive(Debug, Args)]
pub struct RerankArgs {
    /// First-stage run to rerank.
    #[arg(long)]
    pub run: PathBuf,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub topics: TopicArgs,
    #[command(flatten)]
    pub scorer: ScorerArgs,
    /// Rerank only the top N candidates of each topic.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, default_value = "seqrank")]
    pub tag: String,
    /// Run file [default: <output-dir>/<tag>.run].
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long)]
    pub qrels: Option<PathBuf>,
    /// Metrics such as mrr@10, ap, p@20, ndcg@20 [default: all four].
    #[arg(long = "metric", value_name = "METRIC")]
    pub metrics: Vec<String>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Baseline runs; the Bonferroni factor is their count.
    #[arg(long = "baseline", required = true)]
    pub baselines: Vec<PathBuf>,
    #[arg(long)]
    pub candidate: PathBuf,
    #[arg(long)]
    pub qrels: Option<PathBuf>,
    #[arg(long = "metric", value_name = "METRIC")]
    pub metrics: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Labelled training pool.
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long, value_enum, default_value = "labeled")]
    pub train_format: TrainFmt,
    #[arg(long)]
    pub n_pos: usize,
    #[arg(long)]
    pub n_neg: usize,
    #[arg(long)]
    pub positive: Option<String>,
    #[arg(long)]
    pub negative: Option<String>,
    /// Output file [default: <output-dir>/sample.tsv].
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Restrict to these configurations (by name).
    #[arg(long = "only", value_name = "NAME")]
    pub only: Vec<String>,
    #[arg(long, default_value = "mrr@10")]
    pub metric: String,
    /// Training pool sampled once per trial.
    #[arg(long, requires_all = ["n_pos", "n_neg"])]
    pub train: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "labeled")]
    pub train_format: TrainFmt,
    #[arg(long)]
    pub n_pos: Option<usize>,
    #[arg(long)]
    pub n_neg: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub topics: TopicArgs,
    #[arg(long)]
    pub qrels: Option<PathBuf>,
    /// Skip evaluation.
    #[arg(long)]
    pub no_evaluate: bool,
    #[arg(long, value_enum)]
    pub first_stage: Option<Stage>,
    #[arg(long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub scorer: ScorerArgs,
}

/// Error kinds mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

/// Joins the error chain, skipping causes whose text an outer message
/// already includes.
fn render(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {}", render(&e));
            ExitCode::from(2)
        }
    }
}

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use seqrank::corpus_io::{
    parse_corpus, parse_qrels, parse_run, parse_topics, parse_train, write_run, write_train, Corpus, QrelSet, RunList,
    Topic,
};
use seqrank::evaluation::{compare_reports, evaluate_all, write_report_tsv, Metric, ReportSummary};
use seqrank::orchestration::{
    build_scorer, load_inputs, metric_file_stem, prepare, probing_suite, run_pipeline, run_probing, sample_balanced,
    write_probing_tsv, FixedScorer, OrchestrationError, PipelineConfig, ProbingParams, SamplerParams, ScorerConfig,
};
use seqrank::reranking::{rerank_run, RemoteConfig};
use seqrank::retrieval::{
    expand_search_batch, read_index, search_batch, write_index, AnalyzerConfig, InvertedIndex, Stemmer,
};
use seqrank::Execution;

use crate::{
    Cli, CliError, Command, CompareArgs, CorpusArgs, EvaluateArgs, ExpandArgs, IndexArgs, PipelineArgs, ProbeArgs,
    RerankArgs, SampleArgs, ScorerArgs, ScorerKind, SearchArgs, TopicArgs,
};

type Result<T> = std::result::Result<T, CliError>;

const EXEC: Execution = Execution::Parallel;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl From<OrchestrationError> for CliError {
    fn from(e: OrchestrationError) -> Self {
        if e.is_config() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Runtime(e.into())
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path).map_err(|e| usage(e.to_string()))?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = cli.output_dir {
        cfg.output_dir = dir;
    }
    match cli.command {
        Command::Index(a) => index(cfg, a),
        Command::Search(a) => search(cfg, a),
        Command::ExpandSearch(a) => expand_search(cfg, a),
        Command::Rerank(a) => rerank(cfg, a),
        Command::Evaluate(a) => evaluate(cfg, a),
        Command::Compare(a) => compare(cfg, a),
        Command::Sample(a) => sample(cfg, a),
        Command::Probe(a) => probe(cfg, a),
        Command::Pipeline(a) => pipeline(cfg, a),
    }
}

// ---- shared helpers

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("cannot open {}", path.display()))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot create {}", path.display()))
}

fn output_path(explicit: Option<PathBuf>, cfg: &PipelineConfig, default_name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| cfg.output_dir.join(default_name))
}

fn apply_corpus(cfg: &mut PipelineConfig, a: CorpusArgs) {
    if a.corpus.is_some() {
        cfg.corpus = a.corpus;
    }
    if let Some(f) = a.corpus_format {
        cfg.corpus_format = f.into();
    }
}

fn apply_topics(cfg: &mut PipelineConfig, a: TopicArgs) {
    if a.topics.is_some() {
        cfg.topics = a.topics;
    }
    if let Some(f) = a.topics_format {
        cfg.topics_format = f.into();
    }
}

fn apply_scorer(cfg: &mut PipelineConfig, a: ScorerArgs) -> Result<()> {
    let remote_flags =
        a.endpoint.is_some() || a.batch_size.is_some() || a.timeout_secs.is_some() || a.retries.is_some();
    match a.scorer {
        Some(ScorerKind::Overlap) if remote_flags => {
            return Err(usage(
                "--endpoint/--batch-size/--timeout-secs/--retries need --scorer remote",
            ))
        }
        Some(ScorerKind::Overlap) => cfg.scorer = ScorerConfig::Overlap,
        Some(ScorerKind::Remote) => {
            if !matches!(cfg.scorer, ScorerConfig::Remote(_)) {
                cfg.scorer = ScorerConfig::Remote(RemoteConfig::default());
            }
        }
        None if remote_flags && !matches!(cfg.scorer, ScorerConfig::Remote(_)) => {
            cfg.scorer = ScorerConfig::Remote(RemoteConfig::default());
        }
        None => {}
    }
    if let ScorerConfig::Remote(r) = &mut cfg.scorer {
        if let Some(e) = a.endpoint {
            r.endpoint = e;
        }
        if let Some(b) = a.batch_size {
            r.batch_size = b;
        }
        if let Some(t) = a.timeout_secs {
            r.timeout_secs = t;
        }
        if let Some(n) = a.retries {
            r.retries = n;
        }
    }
    if let Some(p) = a.positive {
        cfg.target.positive = p;
    }
    if let Some(n) = a.negative {
        cfg.target.negative = n;
    }
    if let Some(s) = a.window_size {
        cfg.window.size = s;
    }
    if let Some(s) = a.window_stride {
        cfg.window.stride = s;
    }
    if let Some(f) = a.query_field {
        cfg.query_field = f.into();
    }
    cfg.target.validate().map_err(|e| usage(e.to_string()))?;
    cfg.window.validate().map_err(|e| usage(e.to_string()))?;
    Ok(())
}

fn require(path: &Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    path.clone()
        .ok_or_else(|| usage(format!("{flag} is required (on the command line or in --config)")))
}

fn read_topics(cfg: &PipelineConfig) -> Result<Vec<Topic>> {
    let path = require(&cfg.topics, "--topics")?;
    Ok(parse_topics(open(&path)?, cfg.topics_format).with_context(|| format!("{}", path.display()))?)
}

fn read_run(path: &Path) -> Result<RunList> {
    Ok(parse_run(open(path)?).with_context(|| format!("{}", path.display()))?)
}

fn read_qrels(path: &Option<PathBuf>, cfg: &PipelineConfig) -> Result<QrelSet> {
    let path = require(&path.clone().or_else(|| cfg.qrels.clone()), "--qrels")?;
    Ok(parse_qrels(open(&path)?).with_context(|| format!("{}", path.display()))?)
}

fn parse_metrics(names: &[String]) -> Result<Vec<Metric>> {
    if names.is_empty() {
        return Ok(Metric::STANDARD.to_vec());
    }
    names
        .iter()
        .map(|n| n.parse::<Metric>().map_err(|e| usage(e.to_string())))
        .collect()
}

fn save_run(run: &RunList, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    write_run(run, &mut w).with_context(|| format!("writing {}", path.display()))?;
    w.flush().context("flush")?;
    eprintln!(
        "wrote {} ({} topics, {} entries)",
        path.display(),
        run.num_topics(),
        run.len()
    );
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).context("json")?;
    writeln!(w).and_then(|_| w.flush()).context("flush")?;
    Ok(())
}

// ---- subcommands

fn index(mut cfg: PipelineConfig, a: IndexArgs) -> Result<()> {
    apply_corpus(&mut cfg, a.corpus);
    let corpus = require(&cfg.corpus, "--corpus")?;
    let mut analyzer = AnalyzerConfig::default();
    if a.no_stopwords {
        analyzer = analyzer.with_stopwords(std::iter::empty::<String>());
    }
    if a.no_stem {
        analyzer = analyzer.with_stemmer(Stemmer::None);
    }
    let docs = parse_corpus(open(&corpus)?, cfg.corpus_format).with_context(|| format!("{}", corpus.display()))?;
    let index = InvertedIndex::build_with(&docs, analyzer, EXEC).context("building index")?;
    let path = output_path(a.index, &cfg, "index.srix");
    let mut w = create(&path)?;
    write_index(&index, &mut w).with_context(|| format!("writing {}", path.display()))?;
    w.flush().context("flush")?;
    println!(
        "indexed {} documents, {} terms -> {}",
        index.num_docs(),
        index.vocabulary_size(),
        path.display()
    );
    Ok(())
}

fn prepare_search(cfg: &mut PipelineConfig, a: &mut SearchArgs) -> Result<(InvertedIndex, Vec<(String, String)>)> {
    apply_topics(
        cfg,
        TopicArgs {
            topics: a.topics.topics.take(),
            topics_format: a.topics.topics_format,
        },
    );
    if let Some(k) = a.k {
        cfg.k = k;
    }
    if cfg.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    if let Some(k1) = a.k1 {
        cfg.bm25.k1 = k1;
    }
    if let Some(b) = a.b {
        cfg.bm25.b = b;
    }
    cfg.bm25.validate().map_err(|e| usage(e.to_string()))?;
    let topics = read_topics(cfg)?;
    let index = read_index(open(&a.index)?).with_context(|| format!("{}", a.index.display()))?;
    let queries = topics.into_iter().map(|t| (t.id, t.title)).collect();
    Ok((index, queries))
}

fn search(mut cfg: PipelineConfig, mut a: SearchArgs) -> Result<()> {
    let (index, queries) = prepare_search(&mut cfg, &mut a)?;
    let run = search_batch(&index, &cfg.bm25, &queries, cfg.k, &a.tag, EXEC);
    save_run(&run, &output_path(a.output, &cfg, &format!("{}.run", a.tag)))
}

fn expand_search(mut cfg: PipelineConfig, mut a: ExpandArgs) -> Result<()> {
    if let Some(n) = a.fb_docs {
        cfg.rm3.fb_docs = n;
    }
    if let Some(n) = a.fb_terms {
        cfg.rm3.fb_terms = n;
    }
    if let Some(w) = a.original_weight {
        cfg.rm3.original_weight = w;
    }
    cfg.rm3.validate().map_err(|e| usage(e.to_string()))?;
    if a.search.tag == "bm25" {
        a.search.tag = "bm25_rm3".into();
    }
    let (index, queries) = prepare_search(&mut cfg, &mut a.search)?;
    let run = expand_search_batch(&index, &cfg.bm25, &cfg.rm3, &queries, cfg.k, &a.search.tag, EXEC)
        .context("expanded search")?;
    save_run(
        &run,
        &output_path(a.search.output, &cfg, &format!("{}.run", a.search.tag)),
    )
}

fn rerank(mut cfg: PipelineConfig, a: RerankArgs) -> Result<()> {
    apply_corpus(&mut cfg, a.corpus);
    apply_topics(&mut cfg, a.topics);
    apply_scorer(&mut cfg, a.scorer)?;
    if a.depth == Some(0) {
        return Err(usage("--depth must be at least 1"));
    }
    let scorer = build_scorer(&cfg.scorer)?;
    let run = read_run(&a.run)?;
    let topics = read_topics(&cfg)?;
    let queries: HashMap<String, String> = topics
        .iter()
        .map(|t| (t.id.clone(), cfg.query_field.select(t).to_owned()))
        .collect();
    let corpus_path = require(&cfg.corpus, "--corpus")?;
    let docs =
        parse_corpus(open(&corpus_path)?, cfg.corpus_format).with_context(|| format!("{}", corpus_path.display()))?;
    let corpus = Corpus::new(docs).map_err(|e| anyhow!(e))?;
    let reranked = rerank_run(
        &run,
        &queries,
        &corpus,
        &scorer,
        &cfg.target,
        cfg.window,
        a.depth,
        &a.tag,
        EXEC,
    )
    .context("reranking")?;
    save_run(&reranked, &output_path(a.output, &cfg, &format!("{}.run", a.tag)))
}

fn evaluate(cfg: PipelineConfig, a: EvaluateArgs) -> Result<()> {
    let metrics = parse_metrics(&a.metrics)?;
    let qrels = read_qrels(&a.qrels, &cfg)?;
    let run = read_run(&a.run)?;
    let reports = evaluate_all(&metrics, &run, &qrels, EXEC).context("evaluation")?;
    for r in &reports {
        let path = cfg
            .output_dir
            .join(format!("{}.{}.tsv", run.tag, metric_file_stem(r.metric)));
        let mut w = create(&path)?;
        write_report_tsv(r, &mut w).with_context(|| format!("writing {}", path.display()))?;
    }
    let summaries: Vec<ReportSummary> = reports.iter().map(ReportSummary::from).collect();
    let json = serde_json::to_value(&summaries).context("json")?;
    write_json(&cfg.output_dir.join(format!("{}.summary.json", run.tag)), &json)?;
    for (r, s) in reports.iter().zip(&summaries) {
        println!("{}\t{:.4}\t({} topics)", r.metric, s.aggregate, s.n_topics);
    }
    Ok(())
}

fn compare(cfg: PipelineConfig, a: CompareArgs) -> Result<()> {
    let metrics = parse_metrics(&a.metrics)?;
    let qrels = read_qrels(&a.qrels, &cfg)?;
    let candidate = read_run(&a.candidate)?;
    let cand_reports = evaluate_all(&metrics, &candidate, &qrels, EXEC).context("evaluation")?;
    let m = a.baselines.len();
    let mut rows = Vec::new();
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "baseline\tmetric\tbaseline_mean\tcandidate_mean\tt\tp\tp_bonferroni"
    )
    .context("stdout")?;
    for path in &a.baselines {
        let baseline = read_run(path)?;
        let base_reports = evaluate_all(&metrics, &baseline, &qrels, EXEC).context("evaluation")?;
        for (b, c) in base_reports.iter().zip(&cand_reports) {
            let cmp = compare_reports(b, c, m).with_context(|| format!("comparing against {}", baseline.tag))?;
            writeln!(
                out,
                "{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
                baseline.tag, b.metric, cmp.baseline, cmp.candidate, cmp.t, cmp.p, cmp.p_bonferroni
            )
            .context("stdout")?;
            let mut v = serde_json::to_value(&cmp).context("json")?;
            v["baselineTag"] = baseline.tag.clone().into();
            v["candidateTag"] = candidate.tag.clone().into();
            rows.push(v);
        }
    }
    write_json(&cfg.output_dir.join("compare.json"), &serde_json::Value::Array(rows))
}

fn sample(cfg: PipelineConfig, a: SampleArgs) -> Result<()> {
    let mut target = cfg.target.clone();
    if let Some(p) = a.positive {
        target.positive = p;
    }
    if let Some(n) = a.negative {
        target.negative = n;
    }
    target.validate().map_err(|e| usage(e.to_string()))?;
    let pool = parse_train(open(&a.train)?, a.train_format.into()).with_context(|| format!("{}", a.train.display()))?;
    let chosen = sample_balanced(&pool, a.n_pos, a.n_neg, cfg.seed)?;
    let path = output_path(a.output, &cfg, "sample.tsv");
    let mut w = create(&path)?;
    write_train(&chosen, &target, &mut w).with_context(|| format!("writing {}", path.display()))?;
    w.flush().context("flush")?;
    eprintln!(
        "wrote {} instances (seed {}) to {}",
        chosen.len(),
        cfg.seed,
        path.display()
    );
    Ok(())
}

fn probe(cfg: PipelineConfig, a: ProbeArgs) -> Result<()> {
    if a.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let metric: Metric = a
        .metric
        .parse()
        .map_err(|e: seqrank::evaluation::EvalError| usage(e.to_string()))?;
    let mut suite = probing_suite();
    if !a.only.is_empty() {
        for name in &a.only {
            if !suite.iter().any(|c| &c.name == name) {
                let known: Vec<&str> = suite.iter().map(|c| c.name.as_str()).collect();
                return Err(usage(format!(
                    "unknown configuration `{name}` (known: {})",
                    known.join(", ")
                )));
            }
        }
        suite.retain(|c| a.only.contains(&c.name));
    }
    if !cfg.evaluate {
        return Err(usage(
            "probing needs evaluation; remove `evaluate = false` from the config",
        ));
    }
    cfg.validate()?;
    let sampler = match a.train {
        Some(path) => Some(SamplerParams {
            pool: parse_train(open(&path)?, a.train_format.into()).with_context(|| format!("{}", path.display()))?,
            n_pos: a.n_pos.unwrap_or(0),
            n_neg: a.n_neg.unwrap_or(0),
        }),
        None => None,
    };
    let scorer = build_scorer(&cfg.scorer)?;
    let prepared = prepare(&cfg, load_inputs(&cfg)?, EXEC)?;
    let params = ProbingParams {
        trials: a.trials,
        metric,
        sampler,
    };
    let report = run_probing(&prepared, &suite, &params, &FixedScorer(scorer), EXEC)?;
    let path = cfg.output_dir.join("probing.tsv");
    let mut w = create(&path)?;
    write_probing_tsv(&report, &mut w).context("writing probing.tsv")?;
    write_probing_tsv(&report, io::stdout().lock()).context("stdout")?;
    write_json(
        &cfg.output_dir.join("probing.json"),
        &serde_json::to_value(&report).context("json")?,
    )?;
    eprintln!("{} pipeline executions", report.executions);
    Ok(())
}

fn pipeline(mut cfg: PipelineConfig, a: PipelineArgs) -> Result<()> {
    apply_corpus(&mut cfg, a.corpus);
    apply_topics(&mut cfg, a.topics);
    apply_scorer(&mut cfg, a.scorer)?;
    if a.qrels.is_some() {
        cfg.qrels = a.qrels;
    }
    if a.no_evaluate {
        cfg.evaluate = false;
    }
    if let Some(s) = a.first_stage {
        cfg.first_stage = s.into();
    }
    if let Some(k) = a.k {
        cfg.k = k;
    }
    let out = run_pipeline(&cfg, EXEC)?;
    for f in &out.files {
        eprintln!("wrote {}", f.display());
    }
    if let Some(eval) = &out.evaluation {
        println!("metric\tfirststage\tseqrank\tp");
        for (i, (b, r)) in eval.first_stage.iter().zip(&eval.reranked).enumerate() {
            let p = eval
                .comparisons
                .get(i)
                .map_or_else(|| "n/a".to_owned(), |c| format!("{:.4}", c.p));
            println!("{}\t{:.4}\t{:.4}\t{p}", b.metric, b.aggregate, r.aggregate);
        }
    }
    Ok(())
}

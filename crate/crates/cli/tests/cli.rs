use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use seqrank::synthetic::{generate, SyntheticConfig, SyntheticFiles};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_seqrank"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn seqrank")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn fixture() -> (TempDir, SyntheticFiles) {
    let dir = TempDir::new().unwrap();
    let files = generate(&SyntheticConfig::default())
        .unwrap()
        .write_to_dir(&dir.path().join("data"))
        .unwrap();
    (dir, files)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn out_dir(dir: &TempDir) -> PathBuf {
    dir.path().join("out")
}

#[test]
fn help_and_version_exit_zero() {
    for args in [&["--help"][..], &["--version"], &["pipeline", "--help"]] {
        let out = run(args);
        assert_eq!(code(&out), 0, "{args:?}");
        assert!(!stdout(&out).is_empty());
    }
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &[][..],
        &["frobnicate"],
        &["search"],
        &["evaluate", "--run", "x.run", "--bogus"],
        &[
            "--seed",
            "notanumber",
            "sample",
            "--train",
            "t",
            "--n-pos",
            "1",
            "--n-neg",
            "1",
        ],
        &["compare", "--candidate", "c.run"],
    ] {
        assert_eq!(code(&run(args)), 1, "{args:?}");
    }
}

#[test]
fn all_subcommands_are_listed() {
    let help = stdout(&run(&["--help"]));
    for sub in [
        "index",
        "search",
        "expand-search",
        "rerank",
        "evaluate",
        "compare",
        "sample",
        "probe",
        "pipeline",
    ] {
        assert!(help.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn missing_input_is_a_runtime_error() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "--output-dir",
        s(dir.path()),
        "evaluate",
        "--run",
        "/nonexistent/x.run",
        "--qrels",
        "/nonexistent/q",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("/nonexistent"));
}

#[test]
fn config_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "no_such_key = 3\n").unwrap();
    let out = run(&["--config", s(&cfg), "pipeline"]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));

    // Well-formed config that lacks required inputs.
    fs::write(&cfg, "k = 10\n").unwrap();
    assert_eq!(code(&run(&["--config", s(&cfg), "pipeline"])), 1);

    let missing = dir.path().join("absent.toml");
    assert_eq!(code(&run(&["--config", s(&missing), "pipeline"])), 1);
}

#[test]
fn invalid_values_exit_one() {
    let (dir, f) = fixture();
    let out = out_dir(&dir);
    let base = [
        "--output-dir",
        s(&out),
        "pipeline",
        "--corpus",
        s(&f.corpus),
        "--topics",
        s(&f.topics),
        "--qrels",
        s(&f.qrels),
    ];
    let mut args = base.to_vec();
    args.extend(["--window-size", "0"]);
    assert_eq!(code(&run(&args)), 1);
    let mut args = base.to_vec();
    args.extend(["--positive", "same", "--negative", "same"]);
    assert_eq!(code(&run(&args)), 1);
    let mut args = base.to_vec();
    args.extend(["--scorer", "overlap", "--endpoint", "http://localhost:1"]);
    assert_eq!(code(&run(&args)), 1);
}

#[test]
fn stepwise_commands_match_pipeline() {
    let (dir, f) = fixture();
    let out = out_dir(&dir);
    let o = s(&out);

    let r = run(&["--output-dir", o, "index", "--corpus", s(&f.corpus)]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let index = out.join("index.srix");
    assert!(index.exists());

    let r = run(&[
        "--output-dir",
        o,
        "search",
        "--index",
        s(&index),
        "--topics",
        s(&f.topics),
        "--k",
        "50",
        "--tag",
        "firststage",
    ]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let first = out.join("firststage.run");

    let r = run(&[
        "--output-dir",
        o,
        "rerank",
        "--run",
        s(&first),
        "--corpus",
        s(&f.corpus),
        "--topics",
        s(&f.topics),
    ]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let reranked = out.join("seqrank.run");

    let r = run(&[
        "--output-dir",
        o,
        "evaluate",
        "--run",
        s(&first),
        "--qrels",
        s(&f.qrels),
    ]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    assert!(stdout(&r).contains("MRR@10\t0.7000"), "{}", stdout(&r));
    let r = run(&[
        "--output-dir",
        o,
        "evaluate",
        "--run",
        s(&reranked),
        "--qrels",
        s(&f.qrels),
        "--metric",
        "mrr@10",
    ]);
    assert_eq!(code(&r), 0);
    assert!(stdout(&r).contains("MRR@10\t1.0000"), "{}", stdout(&r));
    assert!(out.join("seqrank.mrr10.tsv").exists());
    assert!(out.join("seqrank.summary.json").exists());

    let r = run(&[
        "--output-dir",
        o,
        "compare",
        "--baseline",
        s(&first),
        "--candidate",
        s(&reranked),
        "--qrels",
        s(&f.qrels),
    ]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let cmp: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("compare.json")).unwrap()).unwrap();
    assert_eq!(cmp.as_array().unwrap().len(), 4);

    let pipe = dir.path().join("pipe");
    let r = run(&[
        "--output-dir",
        s(&pipe),
        "pipeline",
        "--corpus",
        s(&f.corpus),
        "--topics",
        s(&f.topics),
        "--qrels",
        s(&f.qrels),
        "--k",
        "50",
    ]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    assert_eq!(
        fs::read(pipe.join("firststage.run")).unwrap(),
        fs::read(&first).unwrap()
    );
    assert_eq!(
        fs::read(pipe.join("seqrank.run")).unwrap(),
        fs::read(&reranked).unwrap()
    );
    for name in ["config.toml", "summary.json", "seqrank.ap.tsv", "firststage.ndcg20.tsv"] {
        assert!(pipe.join(name).exists(), "{name}");
    }
}

#[test]
fn expand_search_writes_rm3_run() {
    let (dir, f) = fixture();
    let out = out_dir(&dir);
    let o = s(&out);
    assert_eq!(code(&run(&["--output-dir", o, "index", "--corpus", s(&f.corpus)])), 0);
    let r = run(&[
        "--output-dir",
        o,
        "expand-search",
        "--index",
        s(&out.join("index.srix")),
        "--topics",
        s(&f.topics),
        "--k",
        "20",
    ]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let body = fs::read_to_string(out.join("bm25_rm3.run")).unwrap();
    assert_eq!(body.lines().count(), 20 * 20);
    assert!(body.lines().all(|l| l.ends_with("bm25_rm3")));
}

#[test]
fn sample_respects_seed() {
    let dir = TempDir::new().unwrap();
    let pool = dir.path().join("pool.tsv");
    let body: String = (0..40).map(|i| format!("q{i}\td{i}\t{}\n", i % 2)).collect();
    fs::write(&pool, body).unwrap();
    let draw = |seed: &str, name: &str| {
        let path = dir.path().join(name);
        let r = run(&[
            "--seed",
            seed,
            "sample",
            "--train",
            s(&pool),
            "--n-pos",
            "3",
            "--n-neg",
            "4",
            "--output",
            s(&path),
        ]);
        assert_eq!(code(&r), 0, "{}", stderr(&r));
        fs::read_to_string(path).unwrap()
    };
    let a = draw("7", "a.tsv");
    assert_eq!(a, draw("7", "b.tsv"));
    assert_ne!(a, draw("8", "c.tsv"));
    assert_eq!(a.lines().count(), 7);
    assert_eq!(a.lines().filter(|l| l.ends_with("\ttrue")).count(), 3);

    // Asking for more than the pool holds is a runtime error.
    let r = run(&[
        "sample",
        "--train",
        s(&pool),
        "--n-pos",
        "30",
        "--n-neg",
        "1",
        "--output",
        s(&dir.path().join("x")),
    ]);
    assert_eq!(code(&r), 2);
}

#[test]
fn probe_runs_selected_configs() {
    let (dir, f) = fixture();
    let out = out_dir(&dir);
    let r = run(&[
        "--output-dir",
        s(&out),
        "--config",
        s(&write_config(&dir, &f)),
        "probe",
        "--trials",
        "2",
        "--only",
        "Baseline",
        "--only",
        "Reverse",
    ]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let tsv = fs::read_to_string(out.join("probing.tsv")).unwrap();
    assert_eq!(tsv.lines().count(), 3, "{tsv}");
    assert!(out.join("probing.json").exists());

    let r = run(&["--config", s(&write_config(&dir, &f)), "probe", "--only", "nonsense"]);
    assert_eq!(code(&r), 1);
}

fn write_config(dir: &TempDir, f: &SyntheticFiles) -> PathBuf {
    let path = dir.path().join("run.toml");
    fs::write(
        &path,
        format!(
            "corpus = {:?}\ntopics = {:?}\nqrels = {:?}\nk = 50\n",
            s(&f.corpus),
            s(&f.topics),
            s(&f.qrels)
        ),
    )
    .unwrap();
    path
}

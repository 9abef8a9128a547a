//! Client side of the scoring protocol against an in-process mock server.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::thread;

use seqrank::reranking::remote::wire;
use seqrank::reranking::{
    rerank, PromptPair, RemoteConfig, RemoteScorer, ScoreRecord, Scorer, ScorerError, WindowConfig,
};
use seqrank::{Document, RunEntry, TargetWordConfig};

type Handler = Box<dyn Fn(usize, &wire::ScoreRequest) -> (u16, String) + Send>;

struct Mock {
    url: String,
    requests: Arc<Mutex<Vec<wire::ScoreRequest>>>,
    paths: Arc<Mutex<Vec<String>>>,
}

/// Serves up to `max` requests with `handler`, which gets the request's
/// ordinal and parsed body.
fn serve(max: usize, handler: Handler) -> Mock {
    let server = tiny_http::Server::http("127.0.0.1:0").unwrap();
    let port = server.server_addr().to_ip().unwrap().port();
    let requests = Arc::new(Mutex::new(Vec::new()));
    let paths = Arc::new(Mutex::new(Vec::new()));
    let (reqs, ps) = (requests.clone(), paths.clone());
    thread::spawn(move || {
        for n in 0..max {
            let Ok(mut req) = server.recv() else { return };
            let mut body = String::new();
            req.as_reader().read_to_string(&mut body).unwrap();
            ps.lock().unwrap().push(format!("{} {}", req.method(), req.url()));
            let parsed: wire::ScoreRequest = serde_json::from_str(&body).unwrap();
            let (status, text) = handler(n, &parsed);
            reqs.lock().unwrap().push(parsed);
            let header = tiny_http::Header::from_bytes("Content-Type", "application/json").unwrap();
            let _ = req.respond(
                tiny_http::Response::from_string(text)
                    .with_status_code(status)
                    .with_header(header),
            );
        }
    });
    Mock {
        url: format!("http://127.0.0.1:{port}"),
        requests,
        paths,
    }
}

fn scorer(url: &str, batch_size: usize, retries: usize) -> RemoteScorer {
    RemoteScorer::new(RemoteConfig {
        endpoint: url.to_owned(),
        batch_size,
        timeout_secs: 5.0,
        retries,
    })
    .unwrap()
}

/// Logits derived from the document text so ordering can be checked.
fn echo_lengths(_: usize, req: &wire::ScoreRequest) -> (u16, String) {
    let scores: Vec<wire::Score> = req
        .pairs
        .iter()
        .map(|p| wire::Score {
            logit_pos: p.document.len() as f64,
            logit_neg: 0.0,
        })
        .collect();
    (200, serde_json::to_string(&wire::ScoreResponse { scores }).unwrap())
}

fn error_body(code: &str) -> String {
    serde_json::to_string(&wire::ErrorResponse {
        error: wire::ErrorBody {
            code: code.into(),
            message: "nope".into(),
        },
    })
    .unwrap()
}

#[test]
fn batches_in_order() {
    let mock = serve(10, Box::new(echo_lengths));
    let docs = ["a", "bb", "ccc", "dddd", "eeeee"];
    let pairs: Vec<PromptPair> = docs.iter().map(|d| PromptPair { query: "q", passage: d }).collect();
    let target = TargetWordConfig::default();
    let logits = scorer(&mock.url, 2, 0).score_batch(&pairs, &target).unwrap();
    let pos: Vec<f64> = logits.iter().map(|l| l.pos).collect();
    assert_eq!(pos, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    let sizes: Vec<usize> = mock.requests.lock().unwrap().iter().map(|r| r.pairs.len()).collect();
    assert_eq!(sizes, vec![2, 2, 1]);
    let first = &mock.requests.lock().unwrap()[0];
    assert_eq!(first.target.positive, "true");
    assert_eq!(first.target.negative, "false");
    assert_eq!(first.pairs[1].query, "q");
    assert!(mock.paths.lock().unwrap().iter().all(|p| p == "POST /score"));
}

#[test]
fn zero_logits_give_one_half() {
    let mock = serve(
        1,
        Box::new(|_, _| (200, r#"{"scores":[{"logit_pos":0.0,"logit_neg":0.0}]}"#.into())),
    );
    let l = scorer(&mock.url, 4, 0)
        .score_batch(
            &[PromptPair {
                query: "q",
                passage: "d",
            }],
            &TargetWordConfig::default(),
        )
        .unwrap();
    assert_eq!(ScoreRecord::new(l[0].pos, l[0].neg).unwrap().prob, 0.5);
}

#[test]
fn length_mismatch_is_reported() {
    let mock = serve(5, Box::new(|_, _| (200, r#"{"scores":[]}"#.into())));
    let err = scorer(&mock.url, 4, 2)
        .score_batch(
            &[PromptPair {
                query: "q",
                passage: "d",
            }],
            &TargetWordConfig::default(),
        )
        .unwrap_err();
    assert!(
        matches!(err, ScorerError::LengthMismatch { expected: 1, got: 0 }),
        "{err}"
    );
    assert_eq!(mock.requests.lock().unwrap().len(), 1);
}

#[test]
fn multi_token_target_is_not_retried() {
    let mock = serve(5, Box::new(|_, _| (400, error_body(wire::MULTI_TOKEN_TARGET))));
    let target = TargetWordConfig::new("supercalifragilistic", "false").unwrap();
    let err = scorer(&mock.url, 4, 3)
        .score_batch(
            &[PromptPair {
                query: "q",
                passage: "d",
            }],
            &target,
        )
        .unwrap_err();
    match err {
        ScorerError::Service { code, .. } => assert_eq!(code, "multi_token_target"),
        other => panic!("unexpected {other}"),
    }
    assert_eq!(mock.requests.lock().unwrap().len(), 1);
}

#[test]
fn internal_errors_are_retried() {
    let mock = serve(
        5,
        Box::new(|n, req| {
            if n < 2 {
                (500, error_body(wire::INTERNAL))
            } else {
                echo_lengths(n, req)
            }
        }),
    );
    let l = scorer(&mock.url, 4, 2)
        .score_batch(
            &[PromptPair {
                query: "q",
                passage: "abc",
            }],
            &TargetWordConfig::default(),
        )
        .unwrap();
    assert_eq!(l[0].pos, 3.0);
    assert_eq!(mock.requests.lock().unwrap().len(), 3);

    let always = serve(5, Box::new(|_, _| (500, error_body(wire::INTERNAL))));
    let err = scorer(&always.url, 4, 1)
        .score_batch(
            &[PromptPair {
                query: "q",
                passage: "abc",
            }],
            &TargetWordConfig::default(),
        )
        .unwrap_err();
    assert!(
        matches!(err, ScorerError::Service { ref code, .. } if code == "internal"),
        "{err}"
    );
    assert_eq!(always.requests.lock().unwrap().len(), 2);
}

#[test]
fn unreachable_service_reports_attempts() {
    let port = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let err = scorer(&format!("http://127.0.0.1:{port}"), 4, 1)
        .score_batch(
            &[PromptPair {
                query: "q",
                passage: "d",
            }],
            &TargetWordConfig::default(),
        )
        .unwrap_err();
    assert!(matches!(err, ScorerError::Transport { attempts: 2, .. }), "{err}");
}

#[test]
fn non_finite_logits_are_rejected() {
    // JSON has no NaN, so a service can only send huge values or nulls.
    let mock = serve(
        1,
        Box::new(|_, _| (200, r#"{"scores":[{"logit_pos":null,"logit_neg":0}]}"#.into())),
    );
    let err = scorer(&mock.url, 4, 0)
        .score_batch(
            &[PromptPair {
                query: "q",
                passage: "d",
            }],
            &TargetWordConfig::default(),
        )
        .unwrap_err();
    assert!(matches!(err, ScorerError::Malformed(_)), "{err}");
}

#[test]
fn reranks_through_the_service() {
    let mock = serve(10, Box::new(echo_lengths));
    let docs: HashMap<String, Document> = [("short", "x."), ("long", "a longer passage.")]
        .iter()
        .map(|&(id, text)| (id.to_owned(), Document::new(id, text)))
        .collect();
    let candidates = vec![
        RunEntry {
            doc_id: "short".into(),
            score: 2.0,
            rank: 1,
        },
        RunEntry {
            doc_id: "long".into(),
            score: 1.0,
            rank: 2,
        },
    ];
    let remote = scorer(&mock.url, 64, 0);
    let out = rerank(
        &candidates,
        "q",
        &docs,
        &remote,
        &TargetWordConfig::default(),
        WindowConfig::default(),
    )
    .unwrap();
    assert_eq!(out[0].doc_id, "long");
    assert_eq!(mock.requests.lock().unwrap().len(), 1);
    assert!(!remote.concurrent());
}

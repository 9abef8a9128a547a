//! HTTP client for an inference service.
//!
//! `POST {endpoint}/score` with
//!
//! ```json
//! {"target": {"positive": "true", "negative": "false"},
//!  "pairs": [{"query": "...", "document": "..."}]}
//! ```
//!
//! answered by `{"scores": [{"logit_pos": 1.5, "logit_neg": -0.5}]}`,
//! index-aligned with `pairs`. Failures come back as
//! `{"error": {"code": "...", "message": "..."}}` with code
//! `multi_token_target`, `bad_request` or `internal`.
//!
//! The service returns raw logits; the softmax is applied client side by
//! [`relevance_prob`](super::relevance_prob).

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::scorer::{LogitPair, PromptPair, Scorer, ScorerError};
use super::TargetWordConfig;

/// Wire types, shared with test servers.
pub mod wire {
    use serde::{Deserialize, Serialize};

    #[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
    pub struct Target {
        pub positive: String,
        pub negative: String,
    }

    #[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
    pub struct Pair {
        pub query: String,
        pub document: String,
    }

    #[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
    pub struct ScoreRequest {
        pub target: Target,
        pub pairs: Vec<Pair>,
    }

    #[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
    pub struct Score {
        pub logit_pos: f64,
        pub logit_neg: f64,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct ScoreResponse {
        pub scores: Vec<Score>,
    }

    #[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
    pub struct ErrorBody {
        pub code: String,
        pub message: String,
    }

    #[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
    pub struct ErrorResponse {
        pub error: ErrorBody,
    }

    pub const MULTI_TOKEN_TARGET: &str = "multi_token_target";
    pub const BAD_REQUEST: &str = "bad_request";
    pub const INTERNAL: &str = "internal";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteConfig {
    /// Base URL of the service, e.g. `http://127.0.0.1:8080`.
    pub endpoint: String,
    pub batch_size: usize,
    pub timeout_secs: f64,
    /// Extra attempts after the first, for transport failures and
    /// `internal` errors.
    pub retries: usize,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            endpoint: "http://127.0.0.1:8080".into(),
            batch_size: 64,
            timeout_secs: 60.0,
            retries: 2,
        }
    }
}

pub struct RemoteScorer {
    config: RemoteConfig,
    url: String,
    agent: ureq::Agent,
}

impl std::fmt::Debug for RemoteScorer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteScorer").field("config", &self.config).finish()
    }
}

enum Attempt {
    Retry(ScorerError),
    Fail(ScorerError),
}

impl RemoteScorer {
    pub fn new(config: RemoteConfig) -> Result<Self, ScorerError> {
        if config.batch_size == 0 {
            return Err(ScorerError::Malformed("batch_size must be at least 1".into()));
        }
        if !(config.timeout_secs.is_finite() && config.timeout_secs > 0.0) {
            return Err(ScorerError::Malformed("timeout must be positive".into()));
        }
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .build();
        let url = format!("{}/score", config.endpoint.trim_end_matches('/'));
        Ok(RemoteScorer { config, url, agent })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn post_once(&self, request: &wire::ScoreRequest) -> Result<Vec<LogitPair>, Attempt> {
        let body = serde_json::to_value(request).expect("request serializes");
        let response = match self.agent.post(&self.url).send_json(body) {
            Ok(r) => r,
            Err(ureq::Error::Status(status, r)) => {
                let text = r.into_string().unwrap_or_default();
                let err = match serde_json::from_str::<wire::ErrorResponse>(&text) {
                    Ok(e) => ScorerError::Service {
                        code: e.error.code,
                        message: e.error.message,
                    },
                    Err(_) => ScorerError::Service {
                        code: if status >= 500 {
                            wire::INTERNAL
                        } else {
                            wire::BAD_REQUEST
                        }
                        .into(),
                        message: format!("HTTP {status}: {text}"),
                    },
                };
                let retryable = matches!(&err, ScorerError::Service { code, .. } if code == wire::INTERNAL);
                return Err(if retryable {
                    Attempt::Retry(err)
                } else {
                    Attempt::Fail(err)
                });
            }
            Err(e) => {
                return Err(Attempt::Retry(ScorerError::Transport {
                    attempts: 0,
                    message: e.to_string(),
                }))
            }
        };
        let text = response.into_string().map_err(|e| {
            Attempt::Retry(ScorerError::Transport {
                attempts: 0,
                message: e.to_string(),
            })
        })?;
        let parsed: wire::ScoreResponse =
            serde_json::from_str(&text).map_err(|e| Attempt::Fail(ScorerError::Malformed(e.to_string())))?;
        let expected = request.pairs.len();
        if parsed.scores.len() != expected {
            return Err(Attempt::Fail(ScorerError::LengthMismatch {
                expected,
                got: parsed.scores.len(),
            }));
        }
        parsed
            .scores
            .iter()
            .enumerate()
            .map(|(index, s)| {
                if s.logit_pos.is_finite() && s.logit_neg.is_finite() {
                    Ok(LogitPair {
                        pos: s.logit_pos,
                        neg: s.logit_neg,
                    })
                } else {
                    Err(Attempt::Fail(ScorerError::NonFinite { index }))
                }
            })
            .collect()
    }

    fn post(&self, request: &wire::ScoreRequest) -> Result<Vec<LogitPair>, ScorerError> {
        let attempts = self.config.retries + 1;
        let mut last = None;
        for attempt in 1..=attempts {
            match self.post_once(request) {
                Ok(v) => return Ok(v),
                Err(Attempt::Fail(e)) => return Err(e),
                Err(Attempt::Retry(e)) => {
                    last = Some(e);
                    if attempt < attempts {
                        thread::sleep(Duration::from_millis(100 << (attempt - 1).min(6)));
                    }
                }
            }
        }
        Err(match last.expect("at least one attempt") {
            ScorerError::Transport { message, .. } => ScorerError::Transport { attempts, message },
            other => other,
        })
    }
}

/// Sends `pairs` in consecutive batches of at most `batch_size` and
/// concatenates the results in order.
pub fn remote_score_batch(
    scorer: &RemoteScorer,
    pairs: &[PromptPair<'_>],
    target: &TargetWordConfig,
) -> Result<Vec<LogitPair>, ScorerError> {
    let mut out = Vec::with_capacity(pairs.len());
    for (b, chunk) in pairs.chunks(scorer.config.batch_size).enumerate() {
        let request = wire::ScoreRequest {
            target: wire::Target {
                positive: target.positive.clone(),
                negative: target.negative.clone(),
            },
            pairs: chunk
                .iter()
                .map(|p| wire::Pair {
                    query: p.query.to_owned(),
                    document: p.passage.to_owned(),
                })
                .collect(),
        };
        let scores = scorer.post(&request).map_err(|e| match e {
            ScorerError::NonFinite { index } => ScorerError::NonFinite {
                index: b * scorer.config.batch_size + index,
            },
            other => other,
        })?;
        out.extend(scores);
    }
    Ok(out)
}

impl Scorer for RemoteScorer {
    fn score_batch(&self, pairs: &[PromptPair<'_>], target: &TargetWordConfig) -> Result<Vec<LogitPair>, ScorerError> {
        remote_score_batch(self, pairs, target)
    }

    /// Requests are issued one batch at a time; the service decides its own
    /// concurrency.
    fn concurrent(&self) -> bool {
        false
    }
}

//! Pipeline configuration, end-to-end runs and the experiment harness.

mod config;
mod pipeline;
mod probing;
mod sampling;

use std::error::Error as StdError;
use std::path::PathBuf;

use thiserror::Error;

pub use config::{FirstStage, PipelineConfig, QueryField, ScorerConfig};
pub use pipeline::{
    build_scorer, load_inputs, metric_file_stem, prepare, run_pipeline, write_outputs, EvaluationSummary,
    PipelineInputs, PipelineOutput, PreparedPipeline,
};
pub use probing::{
    probing_suite, run_probing, write_probing_tsv, FixedScorer, ProbingConfig, ProbingParams, ProbingReport,
    ProbingRow, SamplerParams, ScorerProvider,
};
pub use sampling::sample_balanced;

pub type BoxError = Box<dyn StdError + Send + Sync>;

#[derive(Debug, Error)]
pub enum OrchestrationError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: BoxError,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("not enough {class} instances: requested {requested}, pool has {available}")]
    InsufficientPool {
        class: &'static str,
        requested: usize,
        available: usize,
    },
}

impl OrchestrationError {
    pub(crate) fn stage(stage: &'static str, source: impl Into<BoxError>) -> Self {
        OrchestrationError::Stage {
            stage,
            source: source.into(),
        }
    }

    /// True for errors caused by the configuration rather than by data or
    /// services.
    pub fn is_config(&self) -> bool {
        matches!(self, OrchestrationError::Config(_))
    }
}

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::OrchestrationError;
use crate::corpus_io::{CorpusFormat, Topic, TopicFormat};
use crate::reranking::{RemoteConfig, TargetWordConfig, WindowConfig};
use crate::retrieval::{Bm25Params, Rm3Params, DEFAULT_DEPTH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstStage {
    #[default]
    Bm25,
    Bm25Rm3,
}

/// Which topic field the reranker sees. The first stage always uses the
/// title.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryField {
    Title,
    Description,
    /// Description when non-empty, else title.
    #[default]
    Auto,
}

impl QueryField {
    pub fn select(self, topic: &Topic) -> &str {
        match self {
            QueryField::Title => &topic.title,
            QueryField::Description => &topic.description,
            QueryField::Auto if topic.description.trim().is_empty() => &topic.title,
            QueryField::Auto => &topic.description,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScorerConfig {
    #[default]
    Overlap,
    Remote(RemoteConfig),
}

/// Every parameter of an end-to-end run. Loaded from TOML with the field
/// names below; missing fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub corpus_format: CorpusFormat,
    /// Prebuilt index; when set the corpus is used only for document text.
    pub index: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub topics_format: TopicFormat,
    pub qrels: Option<PathBuf>,
    pub evaluate: bool,
    pub first_stage: FirstStage,
    /// Candidates per topic from the first stage, all of which are reranked.
    pub k: usize,
    pub bm25: Bm25Params,
    pub rm3: Rm3Params,
    pub scorer: ScorerConfig,
    pub target: TargetWordConfig,
    pub window: WindowConfig,
    pub query_field: QueryField,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: None,
            corpus_format: CorpusFormat::Tsv,
            index: None,
            topics: None,
            topics_format: TopicFormat::Tsv3,
            qrels: None,
            evaluate: true,
            first_stage: FirstStage::Bm25,
            k: DEFAULT_DEPTH,
            bm25: Bm25Params::default(),
            rm3: Rm3Params::default(),
            scorer: ScorerConfig::Overlap,
            target: TargetWordConfig::default(),
            window: WindowConfig::default(),
            query_field: QueryField::Auto,
            seed: 0,
            output_dir: PathBuf::from("output"),
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> OrchestrationError {
    OrchestrationError::Config(e.to_string())
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, OrchestrationError> {
        toml::from_str(text).map_err(config_err)
    }

    pub fn load(path: &Path) -> Result<Self, OrchestrationError> {
        let text = fs::read_to_string(path).map_err(|source| OrchestrationError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks parameter ranges and that every input the run needs is set.
    pub fn validate(&self) -> Result<(), OrchestrationError> {
        if self.k == 0 {
            return Err(config_err("k must be at least 1"));
        }
        self.bm25.validate().map_err(config_err)?;
        if self.first_stage == FirstStage::Bm25Rm3 {
            self.rm3.validate().map_err(config_err)?;
        }
        self.window.validate().map_err(config_err)?;
        self.target.validate().map_err(config_err)?;
        if self.corpus.is_none() {
            return Err(config_err("`corpus` is required"));
        }
        if self.topics.is_none() {
            return Err(config_err("`topics` is required"));
        }
        if self.evaluate && self.qrels.is_none() {
            return Err(config_err("evaluation requested but `qrels` is not set"));
        }
        if let ScorerConfig::Remote(r) = &self.scorer {
            if r.batch_size == 0 {
                return Err(config_err("scorer.batch_size must be at least 1"));
            }
            if !(r.timeout_secs.is_finite() && r.timeout_secs > 0.0) {
                return Err(config_err("scorer.timeout_secs must be positive"));
            }
        }
        Ok(())
    }
}

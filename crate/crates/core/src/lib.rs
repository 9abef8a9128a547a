//! Multi-stage document ranking.
//!
//! The pipeline has three stages:
//!
//! 1. Bag-of-words candidate retrieval with BM25, optionally expanded with
//!    RM3 pseudo-relevance feedback ([`retrieval`]).
//! 2. Reranking with a sequence-to-sequence relevance model. A [`Scorer`]
//!    returns the first-decode-step logits of two target words; a two-way
//!    softmax over them gives the relevance probability. Long documents are
//!    cut into overlapping sentence windows and scored by their best window
//!    ([`reranking`]).
//! 3. Evaluation with MRR@10, AP, P@20 and nDCG@20 plus paired t-tests,
//!    Bonferroni correction and confidence intervals ([`evaluation`]).
//!
//! [`orchestration`] wires the stages together and hosts the experiment
//! harness (class-balanced sampling and target-word probing).
//!
//! Data-parallel loops go through [`Execution`]. With the default `parallel`
//! feature they run on rayon; without it every mode runs sequentially.

pub mod corpus_io;
pub mod evaluation;
mod exec;
pub mod orchestration;
pub mod reranking;
pub mod retrieval;
mod rng;
pub mod synthetic;

pub use corpus_io::{Document, QrelSet, RunEntry, RunList, Topic, TrainInstance};
pub use exec::Execution;
pub use reranking::{Scorer, TargetWordConfig};

//! Multi-source answer generation for e-commerce product questions.
//!
//! Knowledge candidates (review sentences, duplicate Q&A pairs and
//! specification key-values) are scored for relevance, the top-k are
//! optionally filtered for conflicting sentiment, and the survivors are
//! concatenated with the question and fed to a small encoder-decoder
//! transformer that writes the answer.
//!
//! Module map:
//! - [`corpus`]: data model, JSONL ingestion, review splitting, vocabulary
//! - [`relevancy`]: pair formatting, lexical and trained scorers, ranking
//! - [`ambiguity`]: question typing, lexicon polarity, candidate filters
//! - [`minigen`]: from-scratch transformer with manual backprop
//! - [`metrics`]: ROUGE-N/L, BLEU-1, classification metrics, reports
//! - [`harness`]: end-to-end pipeline, experiments, config and artifacts

pub mod ambiguity;
pub mod corpus;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod minigen;
pub mod relevancy;
pub mod synth;

pub use ambiguity::{Polarity, QuestionType, SentimentClassifier};
pub use corpus::{Candidate, CorpusStats, QuestionRecord, Source, Vocabulary};
pub use error::{Error, Result};
pub use harness::{AnswerResult, ExperimentSpec, Pipeline, PipelineConfig, Variant};
pub use metrics::{EvalReport, RougeScore};
pub use minigen::{DecodeConfig, GeneratorConfig, GeneratorParams};
pub use relevancy::{PairVariant, RelevancyModel, ScoredCandidate, Scorer};

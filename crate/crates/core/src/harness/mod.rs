//! End-to-end answering: rank, filter, render, generate.
//!
//! Also hosts the key=value configuration, the experiment runner, training
//! corpus preparation and the artifact container.

mod artifact;
mod config;
mod context;
mod experiment;
mod pipeline;
mod prepare;

pub use artifact::{
    load_generator, load_relevancy, read_vocabulary, save_generator, save_relevancy, write_vocabulary, Artifact,
    ArtifactInfo, ArtifactKind, ARTIFACT_FORMAT, ARTIFACT_VERSION,
};
pub use config::{apply_generator, apply_relevancy, KeyValueConfig, PipelineConfig, ScorerKind, Variant, KNOWN_KEYS};
pub use context::{render_context, render_fragment, RenderedContext};
pub use experiment::{evaluate_records, run_experiment, write_reports, ExperimentSpec};
pub use pipeline::{AmbiguityTrace, AnswerResult, AnswerTrace, DecodeTrace, Pipeline, StageStatus};
pub use prepare::{generation_examples, prepare_training_corpus};

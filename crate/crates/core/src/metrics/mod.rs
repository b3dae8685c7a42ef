//! Text-generation and classification metrics.

mod bleu;
mod classification;
mod report;
mod rouge;

pub use bleu::{bleu1, brevity_penalty};
pub use classification::{classification_metrics, confusion, f1_score, ClassificationMetrics, ConfusionCounts};
pub use report::{aggregate_report, render_table, render_table_with, BucketSummary, EvalReport, Metric, QuestionScore};
pub use rouge::{harmonic_mean, lcs_len, rouge_l, rouge_n, RougeScore};

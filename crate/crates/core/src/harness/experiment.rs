use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::Variant;
use super::pipeline::Pipeline;
use crate::corpus::{parse_generation_corpus, QuestionRecord};
use crate::error::{Error, Result};
use crate::metrics::{aggregate_report, render_table_with, EvalReport, Metric, QuestionScore};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub corpus: PathBuf,
    pub variant: Variant,
    /// Columns of the text table; the JSON report always has all metrics.
    pub metrics: Vec<Metric>,
    /// Writes `<output>.json` and `<output>.txt` when set.
    pub output: Option<PathBuf>,
    /// Report label; defaults to the variant name.
    pub label: Option<String>,
}

impl ExperimentSpec {
    pub fn new(corpus: impl Into<PathBuf>, variant: Variant) -> Self {
        ExperimentSpec {
            corpus: corpus.into(),
            variant,
            metrics: Metric::ALL.to_vec(),
            output: None,
            label: None,
        }
    }
}

/// Answers every record with `pipeline` (its variant and scorer as
/// configured) and scores the answers against the references.
pub fn evaluate_records(pipeline: &Pipeline, records: &[QuestionRecord], label: &str) -> Result<EvalReport> {
    if records.is_empty() {
        return Err(Error::EmptyCorpus("evaluation corpus has no records".into()));
    }
    let scores: Vec<QuestionScore> = records
        .par_iter()
        .map(|r| {
            let reference = r
                .reference_answer
                .as_deref()
                .ok_or_else(|| Error::InvalidArgument(format!("question {} has no reference answer", r.id)))?;
            let out = pipeline.answer(r)?;
            Ok(QuestionScore::compute(&r.id, r.qtype(), &out.answer, reference))
        })
        .collect::<Result<_>>()?;
    Ok(aggregate_report(label, scores))
}

fn with_extension(base: &Path, ext: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Runs one experiment: reads the corpus, evaluates the variant and
/// optionally writes the JSON and table reports.
pub fn run_experiment(spec: &ExperimentSpec, pipeline: &Pipeline) -> Result<EvalReport> {
    let corpus = parse_generation_corpus(&spec.corpus)?;
    let p = pipeline.with(spec.variant, pipeline.config.scorer)?;
    let label = spec.label.clone().unwrap_or_else(|| spec.variant.as_str().to_string());
    let report = evaluate_records(&p, &corpus.records, &label)?;
    if let Some(out) = &spec.output {
        write_reports(out, std::slice::from_ref(&report), &spec.metrics)?;
    }
    Ok(report)
}

/// Writes `<base>.json` (an array of reports) and `<base>.txt`.
pub fn write_reports(base: &Path, reports: &[EvalReport], metrics: &[Metric]) -> Result<()> {
    let json_path = with_extension(base, "json");
    let json = serde_json::to_string_pretty(reports)?;
    std::fs::write(&json_path, json + "\n").map_err(|e| Error::io(&json_path, e))?;
    let txt_path = with_extension(base, "txt");
    std::fs::write(&txt_path, render_table_with(reports, metrics)).map_err(|e| Error::io(&txt_path, e))
}

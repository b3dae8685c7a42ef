use serde::{Deserialize, Serialize};

use super::rouge::harmonic_mean;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: ConfusionCounts,
    /// Zero-denominator cases that were reported as 0.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ClassificationMetrics {
    pub fn from_counts(counts: ConfusionCounts) -> Self {
        let mut warnings = Vec::new();
        let ratio = |num: usize, den: usize, what: &str, warnings: &mut Vec<String>| {
            if den == 0 {
                warnings.push(format!("{what} undefined (zero denominator), reported as 0"));
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let accuracy = ratio(counts.tp + counts.tn, counts.total(), "accuracy", &mut warnings);
        let precision = ratio(counts.tp, counts.tp + counts.fp, "precision", &mut warnings);
        let recall = ratio(counts.tp, counts.tp + counts.fn_, "recall", &mut warnings);
        ClassificationMetrics {
            accuracy,
            precision,
            recall,
            f1: harmonic_mean(precision, recall),
            counts,
            warnings,
        }
    }
}

/// F1 from a reported precision/recall pair.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    harmonic_mean(precision, recall)
}

pub fn confusion(predictions: &[bool], labels: &[bool]) -> Result<ConfusionCounts> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: labels.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::InvalidArgument("no predictions to score".into()));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p, l) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

pub fn classification_metrics(predictions: &[bool], labels: &[bool]) -> Result<ClassificationMetrics> {
    let m = ClassificationMetrics::from_counts(confusion(predictions, labels)?);
    for w in &m.warnings {
        log::warn!("{w}");
    }
    Ok(m)
}

use super::rank::Scorer;
use crate::corpus::QuestionRecord;
use crate::error::{Error, Result};
use crate::metrics::{classification_metrics, ClassificationMetrics};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Pooled accuracy, precision, recall and F1 over every labeled
/// (question, candidate) pair. A pair is predicted relevant when its score
/// is at least `threshold`.
pub fn evaluate_relevancy(
    scorer: &dyn Scorer,
    records: &[QuestionRecord],
    threshold: f64,
) -> Result<ClassificationMetrics> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold {threshold} must lie in (0, 1)"
        )));
    }
    let mut predictions = Vec::new();
    let mut labels = Vec::new();
    for r in records {
        for c in &r.candidates {
            let label = c.relevance_label.ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "candidate {} of question {} has no relevance label",
                    c.id, r.id
                ))
            })?;
            predictions.push(scorer.score(r, c) >= threshold);
            labels.push(label);
        }
    }
    if labels.is_empty() {
        return Err(Error::EmptyCorpus("no labeled pairs to evaluate".into()));
    }
    classification_metrics(&predictions, &labels)
}

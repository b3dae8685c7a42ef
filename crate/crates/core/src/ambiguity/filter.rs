use serde::{Deserialize, Serialize};

use super::sentiment::{Polarity, PolarityClassifier};
use crate::corpus::Candidate;

/// Why a candidate was kept or removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterDecision {
    pub candidate_id: String,
    pub polarity: Polarity,
    pub kept: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub kept: Vec<Candidate>,
    pub decisions: Vec<FilterDecision>,
    /// Set when the positive and negative votes tie.
    pub ambiguous: bool,
}

/// Polarity of the opinion-bearing part of a candidate: its `text`
/// (the review sentence, the duplicate answer, or the spec value).
pub fn candidate_polarity(classifier: &dyn PolarityClassifier, c: &Candidate) -> Polarity {
    classifier.polarity(&c.text)
}

fn apply(
    candidates: &[Candidate],
    classifier: &dyn PolarityClassifier,
    mut keep: impl FnMut(Polarity) -> (bool, String),
) -> (Vec<Candidate>, Vec<FilterDecision>) {
    let mut kept = Vec::new();
    let mut decisions = Vec::with_capacity(candidates.len());
    for c in candidates {
        let polarity = candidate_polarity(classifier, c);
        let (k, reason) = keep(polarity);
        if k {
            kept.push(c.clone());
        }
        decisions.push(FilterDecision {
            candidate_id: c.id.clone(),
            polarity,
            kept: k,
            reason,
        });
    }
    (kept, decisions)
}

/// Training-time filter: drops candidates whose polarity is the strict
/// opposite of the reference answer's. Neutral candidates always stay, and
/// a neutral label disables the filter.
pub fn filter_for_training(
    candidates: &[Candidate],
    label_answer: &str,
    classifier: &dyn PolarityClassifier,
) -> FilterOutcome {
    let label = classifier.polarity(label_answer);
    let (kept, decisions) = apply(candidates, classifier, |p| {
        if label == Polarity::Neutral {
            (true, "label is neutral".into())
        } else if p == label.opposite() {
            (false, format!("{p:?} contradicts {label:?} label"))
        } else {
            (true, format!("{p:?} compatible with {label:?} label"))
        }
    });
    FilterOutcome {
        kept,
        decisions,
        ambiguous: false,
    }
}

/// Evaluation-time filter: the minority of Positive vs Negative candidates
/// is removed. Neutral candidates do not vote and are always kept. A tied
/// vote keeps everything and sets `ambiguous`.
pub fn filter_by_majority(candidates: &[Candidate], classifier: &dyn PolarityClassifier) -> FilterOutcome {
    let polarities: Vec<Polarity> = candidates.iter().map(|c| candidate_polarity(classifier, c)).collect();
    let pos = polarities.iter().filter(|&&p| p == Polarity::Positive).count();
    let neg = polarities.iter().filter(|&&p| p == Polarity::Negative).count();
    let minority = match pos.cmp(&neg) {
        std::cmp::Ordering::Greater => Some(Polarity::Negative),
        std::cmp::Ordering::Less => Some(Polarity::Positive),
        std::cmp::Ordering::Equal => None,
    };
    let ambiguous = minority.is_none() && pos > 0;
    let (kept, decisions) = apply(candidates, classifier, |p| match minority {
        Some(m) if p == m => (
            false,
            format!("{p:?} is the minority ({pos} positive / {neg} negative)"),
        ),
        Some(_) => (true, "agrees with majority or neutral".into()),
        None if ambiguous => (true, format!("tie ({pos} positive / {neg} negative), kept")),
        None => (true, "no opinionated candidates".into()),
    });
    FilterOutcome {
        kept,
        decisions,
        ambiguous,
    }
}

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::lexical::lexical_score;
use super::model::RelevancyModel;
use crate::corpus::{Candidate, QuestionRecord};
use crate::error::{Error, Result};

pub const DEFAULT_TOP_K: usize = 7;

/// Anything that assigns a relevance score to a (question, candidate) pair.
pub trait Scorer: Send + Sync {
    fn score(&self, question: &QuestionRecord, candidate: &Candidate) -> f64;

    fn name(&self) -> &str;
}

/// Jaccard overlap of content words.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalScorer;

impl Scorer for LexicalScorer {
    fn score(&self, question: &QuestionRecord, candidate: &Candidate) -> f64 {
        lexical_score(&question.question, candidate)
    }

    fn name(&self) -> &str {
        "lexical"
    }
}

/// Pseudo-random scores in [0, 1), a pure function of the seed and the
/// question and candidate ids.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomScorer {
    pub seed: u64,
}

impl Scorer for RandomScorer {
    fn score(&self, question: &QuestionRecord, candidate: &Candidate) -> f64 {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(question.id.as_bytes());
        h.update([0]);
        h.update(candidate.id.as_bytes());
        let bytes: [u8; 8] = h.finalize()[..8].try_into().expect("digest is 32 bytes");
        (u64::from_le_bytes(bytes) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn name(&self) -> &str {
        "random"
    }
}

/// The same score for every pair; `ConstantScorer(1.0)` is the
/// always-relevant baseline.
#[derive(Debug, Clone, Copy)]
pub struct ConstantScorer(pub f64);

impl Scorer for ConstantScorer {
    fn score(&self, _: &QuestionRecord, _: &Candidate) -> f64 {
        self.0
    }

    fn name(&self) -> &str {
        "constant"
    }
}

impl Scorer for RelevancyModel {
    fn score(&self, question: &QuestionRecord, candidate: &Candidate) -> f64 {
        self.score_pair(&self.pair(question, candidate))
    }

    fn name(&self) -> &str {
        "trained"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub candidate: Candidate,
    /// Position in the input candidate list.
    pub index: usize,
    pub score: f64,
    /// 1-based.
    pub rank: usize,
}

fn key(score: f64) -> f64 {
    if score.is_nan() {
        f64::NEG_INFINITY
    } else {
        score
    }
}

/// Orders candidates by descending score and keeps the first `k`. Ties go
/// to duplicate Q&A, then reviews, then specs, then input order.
pub fn rank_by_scores(candidates: &[Candidate], scores: &[f64], k: usize) -> Result<Vec<ScoredCandidate>> {
    if k == 0 {
        return Err(Error::InvalidArgument("top-k must be at least 1".into()));
    }
    if candidates.len() != scores.len() {
        return Err(Error::LengthMismatch {
            left: candidates.len(),
            right: scores.len(),
        });
    }
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        key(scores[b])
            .partial_cmp(&key(scores[a]))
            .unwrap_or(Ordering::Equal)
            .then(
                candidates[a]
                    .source
                    .tie_priority()
                    .cmp(&candidates[b].source.tie_priority()),
            )
            .then(a.cmp(&b))
    });
    Ok(order
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(r, i)| ScoredCandidate {
            candidate: candidates[i].clone(),
            index: i,
            score: scores[i],
            rank: r + 1,
        })
        .collect())
}

pub fn rank_candidates(question: &QuestionRecord, scorer: &dyn Scorer, k: usize) -> Result<Vec<ScoredCandidate>> {
    let scores: Vec<f64> = question.candidates.iter().map(|c| scorer.score(question, c)).collect();
    rank_by_scores(&question.candidates, &scores, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_tie_break() {
        let cs = vec![
            Candidate::review("a", "x"),
            Candidate::review("b", "y"),
            Candidate::duplicate_qa("c", "q", "z"),
        ];
        let out = rank_by_scores(&cs, &[0.2, 0.9, 0.9], 7).unwrap();
        let ids: Vec<_> = out.iter().map(|s| s.candidate.id.as_str()).collect();
        assert_eq!(ids, ["c", "b", "a"]);
        assert_eq!(out.iter().map(|s| s.rank).collect::<Vec<_>>(), [1, 2, 3]);
    }

    #[test]
    fn single_and_empty() {
        let cs = vec![Candidate::spec("s", "k", "v")];
        assert_eq!(rank_by_scores(&cs, &[0.1], 3).unwrap()[0].rank, 1);
        assert!(rank_by_scores(&[], &[], 3).unwrap().is_empty());
        assert!(rank_by_scores(&cs, &[0.1], 0).is_err());
    }

    #[test]
    fn random_scorer_is_deterministic() {
        let q = QuestionRecord::new("q1", "is it good", vec![]).unwrap();
        let c = Candidate::review("r", "yes");
        let s = RandomScorer { seed: 4 };
        let v = s.score(&q, &c);
        assert_eq!(v, s.score(&q, &c));
        assert!((0.0..1.0).contains(&v));
        assert_ne!(v, RandomScorer { seed: 5 }.score(&q, &c));
    }
}

use serde::{Deserialize, Serialize};

use super::types::{QuestionRecord, Source};
use crate::ambiguity::QuestionType;

/// Aggregate counts over a corpus, as reported after ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub question_count: usize,
    pub candidate_count: usize,
    pub wh_count: usize,
    /// Questions with an empty candidate pool.
    pub unanswerable: usize,
    pub review_count: usize,
    pub dup_qa_count: usize,
    pub spec_count: usize,
    /// Number of labeled candidates marked relevant (0 for unlabeled corpora).
    pub relevant_count: usize,
    pub avg_candidates: f64,
    pub avg_reviews: f64,
    pub avg_dup_qa: f64,
    pub avg_specs: f64,
    pub wh_fraction: f64,
    /// Fraction of labeled candidates of each source marked relevant.
    pub review_relevancy: Option<f64>,
    pub dup_qa_relevancy: Option<f64>,
    pub spec_relevancy: Option<f64>,
}

impl CorpusStats {
    pub fn from_records(records: &[QuestionRecord]) -> Self {
        let question_count = records.len();
        let mut per_source = [0usize; 3];
        let mut labeled = [0usize; 3];
        let mut positive = [0usize; 3];
        let mut wh_count = 0;
        let mut unanswerable = 0;
        for r in records {
            if r.qtype() == QuestionType::WH {
                wh_count += 1;
            }
            if r.candidates.is_empty() {
                unanswerable += 1;
            }
            for c in &r.candidates {
                let s = source_slot(c.source);
                per_source[s] += 1;
                if let Some(l) = c.relevance_label {
                    labeled[s] += 1;
                    positive[s] += l as usize;
                }
            }
        }
        let candidate_count = per_source.iter().sum();
        let avg = |n: usize| {
            if question_count == 0 {
                0.0
            } else {
                n as f64 / question_count as f64
            }
        };
        let rate = |s: usize| (labeled[s] > 0).then(|| positive[s] as f64 / labeled[s] as f64);
        CorpusStats {
            question_count,
            candidate_count,
            wh_count,
            unanswerable,
            review_count: per_source[0],
            dup_qa_count: per_source[1],
            spec_count: per_source[2],
            relevant_count: positive.iter().sum(),
            avg_candidates: avg(candidate_count),
            avg_reviews: avg(per_source[0]),
            avg_dup_qa: avg(per_source[1]),
            avg_specs: avg(per_source[2]),
            wh_fraction: avg(wh_count),
            review_relevancy: rate(0),
            dup_qa_relevancy: rate(1),
            spec_relevancy: rate(2),
        }
    }
}

fn source_slot(s: Source) -> usize {
    match s {
        Source::Review => 0,
        Source::DuplicateQA => 1,
        Source::Spec => 2,
    }
}

impl std::fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "questions               {}", self.question_count)?;
        writeln!(f, "WH questions            {}", self.wh_count)?;
        writeln!(f, "unanswerable            {}", self.unanswerable)?;
        writeln!(f, "total candidates        {}", self.candidate_count)?;
        writeln!(f, "relevant candidates     {}", self.relevant_count)?;
        writeln!(f, "avg candidates/question {:.3}", self.avg_candidates)?;
        writeln!(f, "avg specs/question      {:.3}", self.avg_specs)?;
        writeln!(f, "avg reviews/question    {:.3}", self.avg_reviews)?;
        writeln!(f, "avg dup. q/question     {:.3}", self.avg_dup_qa)?;
        for (name, r) in [
            ("specs", self.spec_relevancy),
            ("qa", self.dup_qa_relevancy),
            ("reviews", self.review_relevancy),
        ] {
            if let Some(r) = r {
                writeln!(f, "avg {name:<8} relevancy {r:.3}")?;
            }
        }
        Ok(())
    }
}

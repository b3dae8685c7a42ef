use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::bleu::bleu1;
use super::rouge::{rouge_l, rouge_n};
use crate::ambiguity::QuestionType;
use crate::corpus::word_tokens;

/// Generation scores for one question, on the 0..1 scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionScore {
    pub id: String,
    pub qtype: QuestionType,
    pub hypothesis: String,
    pub reference: String,
    pub rouge1: f64,
    pub rouge2: f64,
    pub rouge_l: f64,
    /// Sentence-level BLEU-1, informational only.
    pub bleu1: f64,
}

impl QuestionScore {
    /// Scores with the corpus tokenizer (lowercased, punctuation split).
    pub fn compute(id: &str, qtype: QuestionType, hypothesis: &str, reference: &str) -> Self {
        let h = word_tokens(hypothesis);
        let r = word_tokens(reference);
        QuestionScore {
            id: id.to_string(),
            qtype,
            hypothesis: hypothesis.to_string(),
            reference: reference.to_string(),
            rouge1: rouge_n(&h, &r, 1).f1,
            rouge2: rouge_n(&h, &r, 2).f1,
            rouge_l: rouge_l(&h, &r).f1,
            bleu1: bleu1(&[h], &[r]).unwrap_or(0.0),
        }
    }
}

/// Aggregates for one question type, scaled by 100.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketSummary {
    pub qtype: QuestionType,
    pub count: usize,
    pub rouge1: f64,
    pub rouge2: f64,
    pub rouge_l: f64,
    /// Corpus-level BLEU-1 over the bucket.
    pub bleu1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub variant: String,
    pub buckets: Vec<BucketSummary>,
    pub questions: Vec<QuestionScore>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl EvalReport {
    pub fn bucket(&self, qtype: QuestionType) -> Option<&BucketSummary> {
        self.buckets.iter().find(|b| b.qtype == qtype)
    }

    /// Mean ROUGE-1 F over all questions, 0..1 scale.
    pub fn mean_rouge1(&self) -> f64 {
        mean(self.questions.iter().map(|q| q.rouge1))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Macro-averages ROUGE per question type; BLEU-1 is corpus-level within
/// each bucket. Empty buckets are omitted with a note.
pub fn aggregate_report(variant: &str, questions: Vec<QuestionScore>) -> EvalReport {
    let mut buckets = Vec::new();
    let mut notes = Vec::new();
    for qtype in [QuestionType::Dichotomous, QuestionType::WH] {
        let qs: Vec<&QuestionScore> = questions.iter().filter(|q| q.qtype == qtype).collect();
        if qs.is_empty() {
            notes.push(format!("no {} questions; bucket omitted", qtype.as_str()));
            continue;
        }
        let hyps: Vec<Vec<String>> = qs.iter().map(|q| word_tokens(&q.hypothesis)).collect();
        let refs: Vec<Vec<String>> = qs.iter().map(|q| word_tokens(&q.reference)).collect();
        buckets.push(BucketSummary {
            qtype,
            count: qs.len(),
            rouge1: 100.0 * mean(qs.iter().map(|q| q.rouge1)),
            rouge2: 100.0 * mean(qs.iter().map(|q| q.rouge2)),
            rouge_l: 100.0 * mean(qs.iter().map(|q| q.rouge_l)),
            bleu1: 100.0 * bleu1(&hyps, &refs).unwrap_or(0.0),
        });
    }
    EvalReport {
        variant: variant.to_string(),
        buckets,
        questions,
        notes,
    }
}

/// A generation metric column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Rouge1,
    Rouge2,
    RougeL,
    Bleu1,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Rouge1, Metric::Rouge2, Metric::RougeL, Metric::Bleu1];

    pub fn label(self) -> &'static str {
        match self {
            Metric::Rouge1 => "R1",
            Metric::Rouge2 => "R2",
            Metric::RougeL => "RL",
            Metric::Bleu1 => "B1",
        }
    }

    fn of(self, b: &BucketSummary) -> f64 {
        match self {
            Metric::Rouge1 => b.rouge1,
            Metric::Rouge2 => b.rouge2,
            Metric::RougeL => b.rouge_l,
            Metric::Bleu1 => b.bleu1,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "r1" | "rouge1" | "rouge-1" => Ok(Metric::Rouge1),
            "r2" | "rouge2" | "rouge-2" => Ok(Metric::Rouge2),
            "rl" | "rouge_l" | "rougel" | "rouge-l" => Ok(Metric::RougeL),
            "b1" | "bleu1" | "bleu-1" => Ok(Metric::Bleu1),
            other => Err(crate::Error::InvalidArgument(format!("unknown metric {other:?}"))),
        }
    }
}

/// Aligned plain-text table, one row per report, with dichotomous and WH
/// column groups.
pub fn render_table(reports: &[EvalReport]) -> String {
    render_table_with(reports, &Metric::ALL)
}

/// Same as [`render_table`] restricted to `metrics`, in the given order.
pub fn render_table_with(reports: &[EvalReport], metrics: &[Metric]) -> String {
    let name_w = reports.iter().map(|r| r.variant.len()).max().unwrap_or(0).max(7);
    let group_w = (metrics.len() * 8).max(1) - 1;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<name_w$} | {:^group_w$} | {:^group_w$}",
        "", "Dichot. questions", "WH questions"
    );
    let _ = write!(out, "{:<name_w$}", "variant");
    for _ in 0..2 {
        out.push_str(" |");
        for m in metrics {
            let _ = write!(out, " {:>7}", m.label());
        }
    }
    out.push('\n');
    let _ = writeln!(out, "{}", "-".repeat(name_w + 2 * (group_w + 3)));
    for r in reports {
        let _ = write!(out, "{:<name_w$}", r.variant);
        for qtype in [QuestionType::Dichotomous, QuestionType::WH] {
            out.push_str(" |");
            for m in metrics {
                match r.bucket(qtype) {
                    Some(b) => {
                        let _ = write!(out, " {:>7.2}", m.of(b));
                    }
                    None => {
                        let _ = write!(out, " {:>7}", "-");
                    }
                }
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(id: &str, qtype: QuestionType, r1: f64) -> QuestionScore {
        QuestionScore {
            id: id.into(),
            qtype,
            hypothesis: "a".into(),
            reference: "a".into(),
            rouge1: r1,
            rouge2: r1,
            rouge_l: r1,
            bleu1: 1.0,
        }
    }

    #[test]
    fn one_question_per_bucket_is_scaled() {
        let r = aggregate_report(
            "full",
            vec![
                score("1", QuestionType::Dichotomous, 0.25),
                score("2", QuestionType::WH, 0.5),
            ],
        );
        assert_eq!(r.bucket(QuestionType::Dichotomous).unwrap().rouge1, 25.0);
        assert_eq!(r.bucket(QuestionType::WH).unwrap().rouge_l, 50.0);
        assert!(r.notes.is_empty());
    }

    #[test]
    fn macro_average_and_omitted_bucket() {
        let r = aggregate_report(
            "gen",
            vec![score("1", QuestionType::WH, 0.2), score("2", QuestionType::WH, 0.4)],
        );
        let b = r.bucket(QuestionType::WH).unwrap();
        assert!((b.rouge1 - 30.0).abs() < 1e-9);
        assert_eq!(b.count, 2);
        assert!(r.bucket(QuestionType::Dichotomous).is_none());
        assert_eq!(r.notes.len(), 1);
        let t = render_table(&[r]);
        assert!(t.contains("30.00"));
        assert!(t.lines().count() == 4);
    }

    #[test]
    fn compute_uses_corpus_tokenizer() {
        let q = QuestionScore::compute("x", QuestionType::WH, "Sound quality is GOOD.", "the sound is good");
        assert!((q.rouge1 - harmonic(0.6, 0.75)).abs() < 1e-12);
    }

    fn harmonic(p: f64, r: f64) -> f64 {
        2.0 * p * r / (p + r)
    }
}

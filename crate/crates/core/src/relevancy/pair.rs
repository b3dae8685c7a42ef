use serde::{Deserialize, Serialize};

use crate::corpus::{text::normalize, Candidate, QuestionRecord, Source, Vocabulary, CLS, SEP, SPECIALS};

pub const DEFAULT_MAX_SEQ_LEN: usize = 128;

/// What a duplicate Q&A candidate contributes as the second segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairVariant {
    /// Only the duplicate answer.
    AnswerOnly,
    /// Duplicate question and answer, separated by `<sep>`.
    #[default]
    QuestionAnswer,
}

impl std::str::FromStr for PairVariant {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" | "answer" | "answer_only" => Ok(PairVariant::AnswerOnly),
            "qa" | "question_answer" => Ok(PairVariant::QuestionAnswer),
            other => Err(crate::Error::InvalidArgument(format!(
                "unknown pair variant {other:?} (expected a or qa)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairInput {
    pub first: Vec<u32>,
    pub second: Vec<u32>,
    pub variant: PairVariant,
}

impl PairInput {
    /// `[CLS] first [SEP] second [SEP]` with matching segment ids (0 for the
    /// question side, 1 for the candidate side).
    pub fn sequence(&self) -> (Vec<u32>, Vec<u8>) {
        let mut ids = Vec::with_capacity(self.first.len() + self.second.len() + 3);
        let mut segs = Vec::with_capacity(ids.capacity());
        ids.push(CLS);
        ids.extend(&self.first);
        ids.push(SEP);
        segs.resize(ids.len(), 0);
        ids.extend(&self.second);
        ids.push(SEP);
        segs.resize(ids.len(), 1);
        (ids, segs)
    }

    pub fn len(&self) -> usize {
        self.first.len() + self.second.len() + 3
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Normalized text of the second segment.
pub fn render_second(candidate: &Candidate, variant: PairVariant) -> String {
    let sep = SPECIALS[SEP as usize];
    match (candidate.source, &candidate.aux_text) {
        (Source::DuplicateQA, Some(q)) if variant == PairVariant::QuestionAnswer => {
            format!("{} {sep} {}", normalize(q), normalize(&candidate.text))
        }
        (Source::Spec, Some(key)) => format!("{} {sep} {}", normalize(key), normalize(&candidate.text)),
        _ => normalize(&candidate.text),
    }
}

/// Tokenizes the pair and truncates it to `max_seq_len` (at least 4).
/// The second segment loses tokens from its tail first; only when the
/// question alone overflows is it cut as well, down to half the budget.
pub fn format_pair(
    question: &QuestionRecord,
    candidate: &Candidate,
    variant: PairVariant,
    vocab: &Vocabulary,
    max_seq_len: usize,
) -> PairInput {
    let mut first = vocab.tokenize(&question.question);
    let mut second = vocab.tokenize(&render_second(candidate, variant));
    let budget = max_seq_len.max(4) - 3;
    if first.len() + second.len() > budget {
        if first.len() < budget {
            second.truncate(budget - first.len());
        } else {
            let keep_second = second.len().min(budget - budget / 2);
            first.truncate(budget - keep_second);
            second.truncate(keep_second);
        }
    }
    PairInput { first, second, variant }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocabulary {
        Vocabulary::from_texts(
            ["how is the sound quality ? best sound quality display colors 16.7m"],
            100,
        )
        .unwrap()
    }

    fn text(v: &Vocabulary, ids: &[u32]) -> String {
        ids.iter().map(|&i| v.token(i).unwrap()).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn duplicate_qa_variants() {
        let v = vocab();
        let q = QuestionRecord::new("q", "Is the sound good?", vec![]).unwrap();
        let c = Candidate::duplicate_qa("d", "How is the sound quality?", "best sound quality");
        let qa = format_pair(&q, &c, PairVariant::QuestionAnswer, &v, 128);
        assert_eq!(
            text(&v, &qa.second),
            "how is the sound quality ? <sep> best sound quality"
        );
        let a = format_pair(&q, &c, PairVariant::AnswerOnly, &v, 128);
        assert_eq!(text(&v, &a.second), "best sound quality");
    }

    #[test]
    fn spec_same_under_both() {
        let v = vocab();
        let q = QuestionRecord::new("q", "what colors", vec![]).unwrap();
        let c = Candidate::spec("s", "Display Colors", "16.7M");
        for variant in [PairVariant::AnswerOnly, PairVariant::QuestionAnswer] {
            let p = format_pair(&q, &c, variant, &v, 128);
            assert_eq!(text(&v, &p.second), "display colors <sep> 16.7m");
        }
    }

    #[test]
    fn truncates_second_from_tail() {
        let v = vocab();
        let q = QuestionRecord::new("q", "how is the sound", vec![]).unwrap();
        let c = Candidate::review("r", "best sound quality best sound quality");
        let p = format_pair(&q, &c, PairVariant::AnswerOnly, &v, 9);
        assert_eq!(p.len(), 9);
        assert_eq!(p.first.len(), 4);
        assert_eq!(text(&v, &p.second), "best sound");
        let (ids, segs) = p.sequence();
        assert_eq!(ids[0], CLS);
        assert_eq!(ids.len(), segs.len());
        assert_eq!(segs.iter().filter(|&&s| s == 0).count(), 6);
    }

    #[test]
    fn long_question_is_cut_too() {
        let v = vocab();
        let q = QuestionRecord::new("q", "how is the sound quality how is the sound quality", vec![]).unwrap();
        let c = Candidate::review("r", "best sound quality");
        let p = format_pair(&q, &c, PairVariant::AnswerOnly, &v, 9);
        assert!(p.len() <= 9);
        assert!(!p.second.is_empty());
    }
}

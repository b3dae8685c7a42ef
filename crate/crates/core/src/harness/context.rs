use serde::{Deserialize, Serialize};

use crate::corpus::text::{is_punct_token, normalize, word_tokens};
use crate::corpus::{Candidate, QuestionRecord, Source, SEP, SPECIALS};

/// Generator input text for one candidate.
pub fn render_fragment(c: &Candidate) -> String {
    match c.source {
        Source::Review => normalize(&c.text),
        Source::DuplicateQA => match &c.aux_text {
            Some(q) => format!("{} {}", normalize(q), normalize(&c.text)),
            None => normalize(&c.text),
        },
        Source::Spec => {
            let key = c.aux_text.as_deref().unwrap_or("");
            word_tokens(key)
                .into_iter()
                .chain(word_tokens(&c.text))
                .filter(|t| !is_punct_token(t))
                .collect::<Vec<_>>()
                .join(" ")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedContext {
    pub text: String,
    /// Token count after truncation.
    pub tokens: usize,
    /// Tokens dropped from the tail.
    pub truncated: usize,
}

/// `question <sep> fragment fragment ...`, cut to `max_tokens` word tokens
/// from the tail. With no candidates the context is the question alone.
pub fn render_context(question: &QuestionRecord, candidates: &[Candidate], max_tokens: usize) -> RenderedContext {
    let mut text = normalize(&question.question);
    if !candidates.is_empty() {
        text.push(' ');
        text.push_str(SPECIALS[SEP as usize]);
        for c in candidates {
            let f = render_fragment(c);
            if !f.is_empty() {
                text.push(' ');
                text.push_str(&f);
            }
        }
    }
    let tokens = word_tokens(&text);
    if tokens.len() <= max_tokens {
        return RenderedContext {
            text,
            tokens: tokens.len(),
            truncated: 0,
        };
    }
    let truncated = tokens.len() - max_tokens;
    log::debug!("question {}: context truncated by {truncated} tokens", question.id);
    RenderedContext {
        text: tokens[..max_tokens].join(" "),
        tokens: max_tokens,
        truncated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuestionRecord {
        QuestionRecord::new("q", "Is the display good?", vec![]).unwrap()
    }

    #[test]
    fn spec_punctuation_stripped() {
        let c = Candidate::spec("s", "Display Size", "15.8 cm (6.22 inch)");
        assert_eq!(render_fragment(&c), "display size 15.8 cm 6.22 inch");
    }

    #[test]
    fn duplicate_question_then_answer() {
        let c = Candidate::duplicate_qa("d", "How is the sound quality?", "best sound quality");
        assert_eq!(render_fragment(&c), "how is the sound quality ? best sound quality");
    }

    #[test]
    fn question_alone_and_separator() {
        assert_eq!(render_context(&q(), &[], 100).text, "is the display good ?");
        let r = render_context(&q(), &[Candidate::review("r", "Great display!")], 100);
        assert_eq!(r.text, "is the display good ? <sep> great display !");
        assert_eq!(r.tokens, 9);
    }

    #[test]
    fn tail_truncation() {
        let r = render_context(&q(), &[Candidate::review("r", "Great display!")], 7);
        assert_eq!(r.text, "is the display good ? <sep> great");
        assert_eq!(r.truncated, 2);
    }
}

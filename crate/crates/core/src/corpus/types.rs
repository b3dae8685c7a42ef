use serde::{Deserialize, Serialize};

use crate::ambiguity::{classify_question, QuestionType};
use crate::error::{Error, Result};

/// Where a knowledge candidate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Source {
    #[serde(rename = "review")]
    Review,
    #[serde(rename = "dup_qa")]
    DuplicateQA,
    #[serde(rename = "spec")]
    Spec,
}

impl Source {
    pub const ALL: [Source; 3] = [Source::Review, Source::DuplicateQA, Source::Spec];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::Review => "review",
            Source::DuplicateQA => "dup_qa",
            Source::Spec => "spec",
        }
    }

    /// Tie-break priority when ranking; lower sorts first.
    pub(crate) fn tie_priority(self) -> u8 {
        match self {
            Source::DuplicateQA => 0,
            Source::Review => 1,
            Source::Spec => 2,
        }
    }
}

/// One unit of product knowledge.
///
/// For [`Source::DuplicateQA`] `aux_text` holds the duplicate question and
/// `text` its answer; for [`Source::Spec`] `aux_text` is the key and `text`
/// the value. Reviews carry a single sentence in `text`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: String,
    pub source: Source,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux_text: Option<String>,
    #[serde(rename = "relevant", default, skip_serializing_if = "Option::is_none")]
    pub relevance_label: Option<bool>,
}

impl Candidate {
    pub fn review(id: impl Into<String>, text: impl Into<String>) -> Self {
        Candidate {
            id: id.into(),
            source: Source::Review,
            text: text.into(),
            aux_text: None,
            relevance_label: None,
        }
    }

    pub fn duplicate_qa(id: impl Into<String>, question: impl Into<String>, answer: impl Into<String>) -> Self {
        Candidate {
            id: id.into(),
            source: Source::DuplicateQA,
            text: answer.into(),
            aux_text: Some(question.into()),
            relevance_label: None,
        }
    }

    pub fn spec(id: impl Into<String>, key: impl Into<String>, value: impl Into<String>) -> Self {
        Candidate {
            id: id.into(),
            source: Source::Spec,
            text: value.into(),
            aux_text: Some(key.into()),
            relevance_label: None,
        }
    }

    pub fn with_label(mut self, relevant: bool) -> Self {
        self.relevance_label = Some(relevant);
        self
    }

    /// Checks the per-source shape invariants, returning the offending field.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        match self.source {
            Source::DuplicateQA | Source::Spec => {
                let what = if self.source == Source::Spec {
                    "spec key"
                } else {
                    "duplicate question"
                };
                match &self.aux_text {
                    Some(aux) if !aux.trim().is_empty() => {}
                    _ => {
                        return Err((
                            "aux_text",
                            format!("{} candidates require a {what}", self.source.as_str()),
                        ))
                    }
                }
                if self.source == Source::DuplicateQA && self.text.trim().is_empty() {
                    return Err(("text", "duplicate answer is empty".into()));
                }
            }
            Source::Review => {
                if self.aux_text.is_some() {
                    return Err(("aux_text", "review candidates must not carry aux_text".into()));
                }
                if self.text.trim().is_empty() {
                    return Err(("text", "review sentence is empty".into()));
                }
            }
        }
        Ok(())
    }

    /// Plain-text view used for lexical scoring and sentiment: the auxiliary
    /// text (if any) followed by the main text.
    pub fn full_text(&self) -> String {
        match &self.aux_text {
            Some(aux) => format!("{aux} {}", self.text),
            None => self.text.clone(),
        }
    }
}

/// A user question with its pool of candidates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub id: String,
    pub question: String,
    pub candidates: Vec<Candidate>,
    #[serde(rename = "answer", default, skip_serializing_if = "Option::is_none")]
    pub reference_answer: Option<String>,
}

impl QuestionRecord {
    pub fn new(id: impl Into<String>, question: impl Into<String>, candidates: Vec<Candidate>) -> Result<Self> {
        let question = question.into();
        classify_question(&question)?;
        Ok(QuestionRecord {
            id: id.into(),
            question,
            candidates,
            reference_answer: None,
        })
    }

    pub fn with_answer(mut self, answer: impl Into<String>) -> Self {
        self.reference_answer = Some(answer.into());
        self
    }

    /// Question type from the leading word. A question without any word
    /// counts as dichotomous.
    pub fn qtype(&self) -> QuestionType {
        classify_question(&self.question).unwrap_or(QuestionType::Dichotomous)
    }

    pub fn is_answerable(&self) -> bool {
        !self.candidates.is_empty()
    }
}

/// Builds a spec candidate from a key-value pair. The value is kept verbatim.
pub fn spec_candidate(key: &str, value: &str) -> Result<Candidate> {
    if key.trim().is_empty() {
        return Err(Error::InvalidArgument("spec key must not be empty".into()));
    }
    Ok(Candidate::spec(key.trim(), key, value))
}

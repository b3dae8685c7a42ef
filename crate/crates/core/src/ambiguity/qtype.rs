use serde::{Deserialize, Serialize};

use crate::corpus::text::{is_punct_token, word_tokens};
use crate::error::{Error, Result};

/// Yes/no questions get sentiment filtering; WH questions do not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuestionType {
    Dichotomous,
    WH,
}

impl QuestionType {
    pub fn as_str(self) -> &'static str {
        match self {
            QuestionType::Dichotomous => "dichotomous",
            QuestionType::WH => "wh",
        }
    }
}

pub const WH_WORDS: [&str; 9] = ["what", "how", "when", "where", "which", "who", "whom", "whose", "why"];

/// WH iff the first non-punctuation token is a WH word.
pub fn classify_question(question: &str) -> Result<QuestionType> {
    let tokens = word_tokens(question);
    let first = tokens.iter().find(|t| !is_punct_token(t));
    match first {
        None if question.trim().is_empty() => Err(Error::InvalidArgument("question is empty".into())),
        Some(t) if WH_WORDS.contains(&t.as_str()) => Ok(QuestionType::WH),
        _ => Ok(QuestionType::Dichotomous),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(
            classify_question("does phn have theatre sound quality?").unwrap(),
            QuestionType::Dichotomous
        );
        assert_eq!(
            classify_question("how to handle ABC game. graphics and game performance?").unwrap(),
            QuestionType::WH
        );
        assert_eq!(
            classify_question("is this gorilla glass in this device....??").unwrap(),
            QuestionType::Dichotomous
        );
        assert_eq!(classify_question("...Which colour?").unwrap(), QuestionType::WH);
        assert_eq!(classify_question("somehow works?").unwrap(), QuestionType::Dichotomous);
        assert!(classify_question("").is_err());
        assert!(classify_question("  ").is_err());
    }
}

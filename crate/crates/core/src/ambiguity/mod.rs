//! Question typing and sentiment-based candidate filtering.

mod filter;
mod qtype;
mod sentiment;

pub use filter::{candidate_polarity, filter_by_majority, filter_for_training, FilterDecision, FilterOutcome};
pub use qtype::{classify_question, QuestionType, WH_WORDS};
pub use sentiment::{Polarity, PolarityClassifier, SentimentClassifier, NEGATION_WINDOW};

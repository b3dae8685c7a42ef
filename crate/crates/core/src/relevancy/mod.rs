//! Relevance scoring of (question, candidate) pairs.
//!
//! The trained scorer is a next-sentence-prediction style classifier: the
//! question and a rendering of the candidate are packed into one sequence,
//! encoded, and the CLS state is mapped to two logits. A lexical overlap
//! scorer, a seeded random scorer and a constant scorer serve as baselines.

mod eval;
mod lexical;
mod model;
mod pair;
mod rank;
mod train;

pub use eval::{evaluate_relevancy, DEFAULT_THRESHOLD};
pub use lexical::{content_set, is_stopword, lexical_score, STOPWORDS};
pub use model::{RelevancyConfig, RelevancyLayout, RelevancyModel};
pub use pair::{format_pair, render_second, PairInput, PairVariant, DEFAULT_MAX_SEQ_LEN};
pub use rank::{
    rank_by_scores, rank_candidates, ConstantScorer, LexicalScorer, RandomScorer, ScoredCandidate, Scorer,
    DEFAULT_TOP_K,
};
pub use train::{nsp_loss, relevancy_train_defaults, train_relevancy};

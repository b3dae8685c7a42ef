//! Questions, candidates and the corpora they are read from.

mod jsonl;
mod prefilter;
mod stats;
pub mod text;
mod types;
mod vocab;

pub use jsonl::{
    parse_corpus, parse_generation_corpus, parse_record, parse_relevancy_corpus, parse_source, write_corpus, Corpus,
    CorpusTask,
};
pub use prefilter::prefilter;
pub use stats::CorpusStats;
pub use text::{split_review, split_sentences, word_tokens};
pub use types::{spec_candidate, Candidate, QuestionRecord, Source};
pub use vocab::{build_vocabulary, Vocabulary, BOS, CLS, EOS, PAD, SEP, SPECIALS, UNK};

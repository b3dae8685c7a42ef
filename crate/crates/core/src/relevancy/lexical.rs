use std::collections::BTreeSet;

use crate::corpus::{text::content_words, Candidate};

/// Function words ignored by the lexical scorer. Negations and deictic
/// words such as "no" and "here" are deliberately absent.
pub const STOPWORDS: &[&str] = &[
    "a", "an", "the", "is", "are", "was", "were", "be", "been", "being", "am", "do", "does", "did", "has", "have",
    "had", "i", "me", "my", "we", "our", "you", "your", "he", "she", "they", "them", "their", "it", "its", "it's",
    "this", "that", "these", "those", "of", "in", "on", "at", "to", "for", "with", "by", "from", "as", "and", "or",
    "but", "if", "so", "than", "then", "there", "can", "could", "will", "would", "should", "shall", "may", "might",
    "must", "what", "which", "who", "whom", "how", "why", "when", "where", "about", "into", "any", "some", "all",
    "also", "very", "just", "yes",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.contains(&token)
}

/// Lowercased content words minus stopwords, as a set.
pub fn content_set(text: &str) -> BTreeSet<String> {
    content_words(text).into_iter().filter(|w| !is_stopword(w)).collect()
}

/// Jaccard overlap of the content-word sets of the question and the
/// candidate's full text. Zero when either set is empty.
pub fn lexical_score(question: &str, candidate: &Candidate) -> f64 {
    jaccard(&content_set(question), &content_set(&candidate.full_text()))
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

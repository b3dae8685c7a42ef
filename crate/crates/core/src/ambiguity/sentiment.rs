use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::text::{is_punct_token, word_tokens};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
    Neutral,
}

impl Polarity {
    pub fn opposite(self) -> Polarity {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
            Polarity::Neutral => Polarity::Neutral,
        }
    }
}

/// Anything that can assign a polarity to a piece of text.
pub trait PolarityClassifier: Send + Sync {
    fn polarity(&self, text: &str) -> Polarity;
}

const DEFAULT_LEXICON: &str = include_str!("../../data/lexicon.tsv");
const DEFAULT_NEGATIONS: &str = include_str!("../../data/negations.txt");

pub const NEGATION_WINDOW: usize = 3;

/// Lexicon classifier: sums signed term hits, flipping the sign of hits
/// within `window` tokens after a negation word. Punctuation closes a
/// negation scope.
#[derive(Debug, Clone)]
pub struct SentimentClassifier {
    lexicon: HashMap<String, i32>,
    negations: HashSet<String>,
    window: usize,
}

impl Default for SentimentClassifier {
    fn default() -> Self {
        SentimentClassifier::from_strs(DEFAULT_LEXICON, DEFAULT_NEGATIONS, NEGATION_WINDOW)
            .expect("bundled lexicon is well formed")
    }
}

impl SentimentClassifier {
    pub fn from_strs(lexicon: &str, negations: &str, window: usize) -> Result<Self> {
        let mut lex = HashMap::new();
        for (i, line) in lexicon.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (term, sign) = line
                .split_once('\t')
                .ok_or_else(|| Error::schema(i + 1, "lexicon", format!("expected term<TAB>+1|-1, got `{line}`")))?;
            let sign = match sign.trim() {
                "+1" | "1" => 1,
                "-1" => -1,
                other => return Err(Error::schema(i + 1, "lexicon", format!("bad polarity `{other}`"))),
            };
            lex.insert(term.trim().to_lowercase(), sign);
        }
        let negations = negations
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Ok(SentimentClassifier {
            lexicon: lex,
            negations,
            window,
        })
    }

    pub fn from_files(lexicon: &Path, negations: &Path) -> Result<Self> {
        let lex = std::fs::read_to_string(lexicon).map_err(|e| Error::io(lexicon, e))?;
        let neg = std::fs::read_to_string(negations).map_err(|e| Error::io(negations, e))?;
        SentimentClassifier::from_strs(&lex, &neg, NEGATION_WINDOW)
    }

    pub fn term_polarity(&self, term: &str) -> Option<i32> {
        self.lexicon.get(term).copied()
    }

    pub fn is_negation(&self, term: &str) -> bool {
        self.negations.contains(term)
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Signed lexicon score of `text`.
    pub fn score(&self, text: &str) -> i32 {
        let mut score = 0;
        let mut negated_for = 0usize;
        for tok in word_tokens(text) {
            if is_punct_token(&tok) {
                negated_for = 0;
                continue;
            }
            if self.negations.contains(&tok) {
                negated_for = self.window;
                continue;
            }
            if let Some(&s) = self.lexicon.get(&tok) {
                score += if negated_for > 0 { -s } else { s };
            }
            negated_for = negated_for.saturating_sub(1);
        }
        score
    }
}

impl PolarityClassifier for SentimentClassifier {
    fn polarity(&self, text: &str) -> Polarity {
        match self.score(text) {
            s if s > 0 => Polarity::Positive,
            s if s < 0 => Polarity::Negative,
            _ => Polarity::Neutral,
        }
    }
}

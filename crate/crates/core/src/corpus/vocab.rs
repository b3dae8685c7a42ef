use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::text::word_tokens;
use super::types::QuestionRecord;
use crate::error::{Error, Result};

pub const PAD: u32 = 0;
pub const UNK: u32 = 1;
pub const BOS: u32 = 2;
pub const EOS: u32 = 3;
pub const SEP: u32 = 4;
pub const CLS: u32 = 5;

/// Special token strings, indexed by their id.
pub const SPECIALS: [&str; 6] = ["<pad>", "<unk>", "<s>", "</s>", "<sep>", "<cls>"];

/// Word-level vocabulary. Specials take ids 0..6 in the order of
/// [`SPECIALS`]; the rest are ranked by corpus frequency, then
/// lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl TryFrom<Vec<String>> for Vocabulary {
    type Error = Error;

    fn try_from(tokens: Vec<String>) -> Result<Self> {
        Vocabulary::from_tokens(tokens)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.tokens
    }
}

impl Vocabulary {
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < SPECIALS.len() || tokens.iter().zip(SPECIALS).any(|(t, s)| t != s) {
            return Err(Error::Artifact("vocabulary must start with the special tokens".into()));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::Artifact(format!("duplicate vocabulary entry `{t}`")));
            }
        }
        Ok(Vocabulary { tokens, index })
    }

    /// Builds from raw strings; `max_size` counts the specials.
    pub fn from_texts<'a, I>(texts: I, max_size: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        if max_size <= SPECIALS.len() {
            return Err(Error::InvalidArgument(format!(
                "max_size must exceed the {} special tokens",
                SPECIALS.len()
            )));
        }
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut any = false;
        for text in texts {
            any = true;
            for tok in word_tokens(text) {
                if !SPECIALS.contains(&tok.as_str()) {
                    *counts.entry(tok).or_default() += 1;
                }
            }
        }
        if !any || counts.is_empty() {
            return Err(Error::EmptyCorpus("no tokens to build a vocabulary from".into()));
        }
        let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
        // BTreeMap order is lexicographic; the stable sort keeps it for ties.
        ranked.sort_by_key(|e| std::cmp::Reverse(e.1));
        let tokens = SPECIALS
            .iter()
            .map(|s| s.to_string())
            .chain(ranked.into_iter().map(|(t, _)| t))
            .take(max_size)
            .collect();
        Vocabulary::from_tokens(tokens)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn tokenize(&self, text: &str) -> Vec<u32> {
        word_tokens(text).iter().map(|t| self.id(t).unwrap_or(UNK)).collect()
    }

    /// Joins tokens with single spaces, dropping PAD/BOS/EOS.
    pub fn detokenize(&self, ids: &[u32]) -> String {
        ids.iter()
            .filter(|&&id| !matches!(id, PAD | BOS | EOS))
            .map(|&id| self.token(id).unwrap_or(SPECIALS[UNK as usize]))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// SHA-256 over the newline-joined token list, hex encoded.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.tokens {
            h.update(t.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }
}

/// Vocabulary over questions, candidate texts and reference answers.
pub fn build_vocabulary(records: &[QuestionRecord], max_size: usize) -> Result<Vocabulary> {
    if records.is_empty() {
        return Err(Error::EmptyCorpus("cannot build a vocabulary from zero records".into()));
    }
    let texts = records.iter().flat_map(|r| {
        std::iter::once(r.question.as_str())
            .chain(r.reference_answer.as_deref())
            .chain(
                r.candidates
                    .iter()
                    .flat_map(|c| std::iter::once(c.text.as_str()).chain(c.aux_text.as_deref())),
            )
    });
    Vocabulary::from_texts(texts, max_size)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_then_lexicographic() {
        let v = Vocabulary::from_texts(["good good phone"], 10).unwrap();
        assert_eq!(v.len(), 8);
        assert_eq!(v.token(6), Some("good"));
        assert_eq!(v.token(7), Some("phone"));
        let v = Vocabulary::from_texts(["b a c"], 10).unwrap();
        assert_eq!(&v.tokens()[6..], ["a", "b", "c"]);
    }

    #[test]
    fn truncates_to_max_size() {
        let text: Vec<String> = (0..20).map(|i| format!("w{i:02}")).collect();
        let joined = text.join(" ");
        let v = Vocabulary::from_texts([joined.as_str()], 8).unwrap();
        assert_eq!(v.len(), 8);
        assert_eq!(&v.tokens()[..6], SPECIALS);
    }

    #[test]
    fn rejects_bad_sizes_and_empty() {
        assert!(Vocabulary::from_texts(["x"], 6).is_err());
        assert!(matches!(build_vocabulary(&[], 100), Err(Error::EmptyCorpus(_))));
    }

    #[test]
    fn tokenize_maps_oov_to_unk() {
        let v = Vocabulary::from_texts(["gorilla glass ? good phone ."], 50).unwrap();
        let ids = v.tokenize("Gorilla glass???");
        assert_eq!(
            ids,
            [v.id("gorilla").unwrap(), v.id("glass").unwrap(), v.id("?").unwrap()]
        );
        assert_eq!(v.tokenize(""), Vec::<u32>::new());
        assert_eq!(v.tokenize("alpha beta gamma"), [UNK, UNK, UNK]);
        assert_eq!(v.detokenize(&ids), "gorilla glass ?");
    }

    #[test]
    fn serde_roundtrip_checks_specials() {
        let v = Vocabulary::from_texts(["a b"], 10).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        let back: Vocabulary = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.hash(), v.hash());
        assert!(serde_json::from_str::<Vocabulary>(r#"["a","b"]"#).is_err());
    }
}

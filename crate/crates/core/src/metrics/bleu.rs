use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

/// Brevity penalty `min(1, exp(1 - r/c))`; zero for an empty candidate.
pub fn brevity_penalty(cand_len: usize, ref_len: usize) -> f64 {
    if cand_len == 0 {
        return 0.0;
    }
    if cand_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    }
}

/// Corpus-level BLEU-1: clipped unigram precision over the whole corpus
/// times the brevity penalty on corpus-summed lengths. No smoothing.
pub fn bleu1<T: Eq + Hash>(candidates: &[Vec<T>], references: &[Vec<T>]) -> Result<f64> {
    if candidates.len() != references.len() {
        return Err(Error::LengthMismatch {
            left: candidates.len(),
            right: references.len(),
        });
    }
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("bleu1 needs at least one pair".into()));
    }
    let mut matched = 0usize;
    let mut cand_len = 0usize;
    let mut ref_len = 0usize;
    for (c, r) in candidates.iter().zip(references) {
        let mut ref_counts: HashMap<&T, usize> = HashMap::new();
        for t in r {
            *ref_counts.entry(t).or_default() += 1;
        }
        for t in c {
            if let Some(n) = ref_counts.get_mut(t) {
                if *n > 0 {
                    *n -= 1;
                    matched += 1;
                }
            }
        }
        cand_len += c.len();
        ref_len += r.len();
    }
    if cand_len == 0 {
        return Ok(0.0);
    }
    Ok(matched as f64 / cand_len as f64 * brevity_penalty(cand_len, ref_len))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn hand_worked() {
        let b = bleu1(&[w("good phone")], &[w("good phone yes")]).unwrap();
        assert!((b - (1.0f64 - 1.5).exp()).abs() < 1e-12);
        assert!((b - 0.6065).abs() < 1e-4);
        let b = bleu1(&[w("good good good")], &[w("good phone")]).unwrap();
        assert!((b - 1.0 / 3.0).abs() < 1e-12);
        let corpus = vec![w("a b"), w("c d e")];
        assert_eq!(bleu1(&corpus, &corpus).unwrap(), 1.0);
    }

    #[test]
    fn edge_cases() {
        assert_eq!(bleu1(&[w("")], &[w("a")]).unwrap(), 0.0);
        assert!(bleu1::<&str>(&[], &[]).is_err());
        assert!(bleu1(&[w("a")], &[]).is_err());
    }
}

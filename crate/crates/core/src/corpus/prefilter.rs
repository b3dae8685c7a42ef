use super::types::{Candidate, Source};
use crate::error::{Error, Result};
use crate::relevancy::lexical_score;

/// Weak pre-retrieval: keeps the `cap` best candidates of each source by
/// lexical overlap with the question, then orders the survivors by
/// descending score. Ties keep input order.
pub fn prefilter(question: &str, candidates: &[Candidate], cap: usize) -> Result<Vec<Candidate>> {
    if cap == 0 {
        return Err(Error::InvalidArgument("prefilter cap must be at least 1".into()));
    }
    let mut scored: Vec<(usize, f64)> = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| (i, lexical_score(question, c)))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut taken = [0usize; 3];
    let out = scored
        .into_iter()
        .filter(|&(i, _)| {
            let slot = match candidates[i].source {
                Source::Review => 0,
                Source::DuplicateQA => 1,
                Source::Spec => 2,
            };
            taken[slot] += 1;
            taken[slot] <= cap
        })
        .map(|(i, _)| candidates[i].clone())
        .collect();
    Ok(out)
}

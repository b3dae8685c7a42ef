use crate::ambiguity::{filter_for_training, PolarityClassifier, QuestionType};
use crate::corpus::{QuestionRecord, Vocabulary};
use crate::error::{Error, Result};
use crate::minigen::{GeneratorConfig, Seq2SeqExample};
use crate::relevancy::{rank_candidates, Scorer};

use super::context::render_context;

/// Builds the generator training corpus: keeps each record's top-k
/// candidates and, for dichotomous questions, drops candidates whose
/// polarity contradicts the reference answer.
pub fn prepare_training_corpus(
    records: &[QuestionRecord],
    scorer: &dyn Scorer,
    classifier: &dyn PolarityClassifier,
    top_k: usize,
) -> Result<Vec<QuestionRecord>> {
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        let answer = r
            .reference_answer
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument(format!("question {} has no reference answer", r.id)))?;
        let ranked: Vec<_> = rank_candidates(r, scorer, top_k)?
            .into_iter()
            .map(|s| s.candidate)
            .collect();
        let kept = if r.qtype() == QuestionType::Dichotomous {
            filter_for_training(&ranked, answer, classifier).kept
        } else {
            ranked
        };
        let mut rec = r.clone();
        rec.candidates = kept;
        out.push(rec);
    }
    Ok(out)
}

/// Generator examples from prepared records: the rendered context of the
/// candidates in stored order, and the reference answer.
pub fn generation_examples(
    records: &[QuestionRecord],
    vocab: &Vocabulary,
    config: &GeneratorConfig,
) -> Result<Vec<Seq2SeqExample>> {
    records
        .iter()
        .map(|r| {
            let answer = r
                .reference_answer
                .as_deref()
                .ok_or_else(|| Error::InvalidArgument(format!("question {} has no reference answer", r.id)))?;
            let ctx = render_context(r, &r.candidates, config.max_src_len);
            Ok(Seq2SeqExample::from_text(vocab, &ctx.text, answer, config))
        })
        .collect()
}

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::{RelevancyConfig, RelevancyModel};
use super::pair::PairInput;
use crate::corpus::{QuestionRecord, Vocabulary};
use crate::error::{Error, Result};
use crate::minigen::layers::Dropout;
use crate::minigen::{accumulate, clip_grad_norm, example_rng, Adam, TrainConfig, TrainReport};

/// Optimizer defaults for relevancy fine-tuning: 5 epochs, batches of 32
/// questions.
pub fn relevancy_train_defaults() -> TrainConfig {
    TrainConfig {
        epochs: 5,
        ..TrainConfig::default()
    }
}

/// Pairs of one question, each with its label.
type QuestionPairs = Vec<(PairInput, bool)>;

fn labeled_pairs(model: &RelevancyModel, records: &[QuestionRecord]) -> Result<Vec<QuestionPairs>> {
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        if r.candidates.is_empty() {
            log::warn!("question {} has no candidates; skipped", r.id);
            continue;
        }
        let mut pairs = Vec::with_capacity(r.candidates.len());
        for c in &r.candidates {
            let label = c.relevance_label.ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "candidate {} of question {} has no relevance label",
                    c.id, r.id
                ))
            })?;
            pairs.push((model.pair(r, c), label));
        }
        out.push(pairs);
    }
    if out.is_empty() {
        return Err(Error::EmptyCorpus("no question with candidates to train on".into()));
    }
    Ok(out)
}

/// Mean over questions of the mean per-candidate cross-entropy. Questions
/// without candidates do not count.
pub fn nsp_loss(model: &RelevancyModel, records: &[QuestionRecord]) -> Result<f64> {
    let questions = labeled_pairs(model, records)?;
    let total: f64 = questions
        .iter()
        .map(|q| q.iter().map(|(p, y)| model.pair_loss(p, *y)).sum::<f64>() / q.len() as f64)
        .sum();
    Ok(total / questions.len() as f64)
}

/// Trains a fresh relevancy model. Each step takes `batch_size` questions and
/// minimizes the mean over those questions of each question's mean
/// per-candidate cross-entropy.
pub fn train_relevancy(
    records: &[QuestionRecord],
    vocab: Vocabulary,
    config: RelevancyConfig,
    train: &TrainConfig,
) -> Result<(RelevancyModel, TrainReport)> {
    train.validate()?;
    let mut model = RelevancyModel::new(config, vocab)?;
    let questions = labeled_pairs(&model, records)?;
    let mut opt = Adam::new(model.num_params(), train.learning_rate);
    let mut order: Vec<usize> = (0..questions.len()).collect();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(train.seed);
    let mut report = TrainReport {
        epoch_losses: Vec::with_capacity(train.epochs),
        steps: 0,
    };
    let dropout = model.config.dropout;
    for epoch in 0..train.epochs {
        if train.shuffle {
            order.shuffle(&mut shuffle_rng);
        }
        let mut per_question = vec![0.0; questions.len()];
        for batch in order.chunks(train.batch_size) {
            // (question, pair) with weight 1 / (B * n_q)
            let items: Vec<(usize, usize, f64)> = batch
                .iter()
                .flat_map(|&q| {
                    let n = questions[q].len();
                    let w = 1.0 / (batch.len() * n) as f64;
                    (0..n).map(move |j| (q, j, w))
                })
                .collect();
            let snapshot = &model;
            let (losses, mut grad) = accumulate(&items, snapshot.num_params(), |k, &(q, j, w)| {
                let mut rng = example_rng(train.seed, epoch, k);
                let mut drop = (dropout > 0.0).then_some(Dropout {
                    rate: dropout,
                    rng: &mut rng,
                });
                let (pair, label) = &questions[q][j];
                let (loss, g) = snapshot.loss_and_grad(pair, *label, &mut drop);
                Ok::<_, Error>((loss, w, g))
            })?;
            for (&(q, _, _), l) in items.iter().zip(&losses) {
                per_question[q] += l / questions[q].len() as f64;
            }
            if !losses.iter().all(|l| l.is_finite()) {
                return Err(Error::Diverged(format!(
                    "non-finite relevancy loss at epoch {epoch}, step {}",
                    report.steps
                )));
            }
            if let Some(max) = train.clip_norm {
                clip_grad_norm(&mut grad, max);
            }
            opt.step(&mut model.data, &grad);
            report.steps += 1;
            if !model.is_finite() {
                return Err(Error::Diverged(format!(
                    "non-finite relevancy parameters at epoch {epoch}, step {}",
                    report.steps
                )));
            }
        }
        let mean = per_question.iter().sum::<f64>() / questions.len() as f64;
        log::debug!("relevancy epoch {epoch}: loss {mean:.5}");
        report.epoch_losses.push(mean);
    }
    model.trained_with = Some(train.clone());
    Ok((model, report))
}

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::Dropout;
use super::model::{GeneratorConfig, GeneratorParams, Seq2SeqExample};
use super::optim::{accumulate, clip_grad_norm, Adam};
use crate::error::{Error, Result};

/// Optimizer settings. The defaults are the fine-tuning values (batch 32,
/// learning rate 5e-5, 25 epochs); from-scratch fixture runs override them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Global gradient-norm clip; `None` disables clipping.
    pub clip_norm: Option<f64>,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 25,
            batch_size: 32,
            learning_rate: 5e-5,
            clip_norm: Some(1.0),
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch_size must be at least 1".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(
                "learning_rate must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean per-example loss of each epoch, in example order.
    pub epoch_losses: Vec<f64>,
    pub steps: usize,
}

/// Per-example dropout stream, independent of batch scheduling.
pub(crate) fn example_rng(seed: u64, epoch: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    rng.set_stream(((epoch as u64) << 32) | index as u64);
    rng
}

/// Trains a freshly initialized generator on `examples`.
pub fn train_generator(
    examples: &[Seq2SeqExample],
    vocab_size: usize,
    model: GeneratorConfig,
    train: &TrainConfig,
) -> Result<(GeneratorParams, TrainReport)> {
    let mut params = GeneratorParams::new(model, vocab_size)?;
    let report = continue_training(&mut params, examples, train, |_, _| {})?;
    Ok((params, report))
}

/// Runs `train.epochs` epochs of mini-batch Adam on existing parameters.
/// `on_epoch` sees the epoch index and its mean loss.
pub fn continue_training(
    params: &mut GeneratorParams,
    examples: &[Seq2SeqExample],
    train: &TrainConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<TrainReport> {
    train.validate()?;
    if examples.is_empty() {
        return Err(Error::EmptyCorpus("no generator training examples".into()));
    }
    let mut opt = Adam::new(params.num_params(), train.learning_rate);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(train.seed);
    let mut report = TrainReport {
        epoch_losses: Vec::with_capacity(train.epochs),
        steps: 0,
    };
    let dropout = params.config.dropout;
    for epoch in 0..train.epochs {
        if train.shuffle {
            order.shuffle(&mut shuffle_rng);
        }
        let mut per_example = vec![0.0; examples.len()];
        for batch in order.chunks(train.batch_size) {
            let weight = 1.0 / batch.len() as f64;
            let snapshot = &*params;
            let (losses, mut grad) = accumulate(batch, snapshot.num_params(), |_, &idx| {
                let mut rng = example_rng(train.seed, epoch, idx);
                let mut drop = (dropout > 0.0).then_some(Dropout {
                    rate: dropout,
                    rng: &mut rng,
                });
                let (loss, g) = snapshot.loss_and_grad(&examples[idx], &mut drop)?;
                Ok::<_, Error>((loss, weight, g))
            })?;
            let batch_loss = losses.iter().sum::<f64>() * weight;
            if !batch_loss.is_finite() {
                return Err(Error::Diverged(format!(
                    "non-finite loss {batch_loss} at epoch {epoch}, step {}; check the learning rate ({})",
                    report.steps, train.learning_rate
                )));
            }
            for (&idx, l) in batch.iter().zip(losses) {
                per_example[idx] = l;
            }
            if let Some(max) = train.clip_norm {
                clip_grad_norm(&mut grad, max);
            }
            opt.step(&mut params.data, &grad);
            report.steps += 1;
        }
        if !params.is_finite() {
            return Err(Error::Diverged(format!("non-finite parameters after epoch {epoch}")));
        }
        let mean = per_example.iter().sum::<f64>() / examples.len() as f64;
        log::debug!("generator epoch {epoch}: loss {mean:.5}");
        on_epoch(epoch, mean);
        report.epoch_losses.push(mean);
    }
    Ok(report)
}

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pair::{format_pair, PairInput, PairVariant, DEFAULT_MAX_SEQ_LEN};
use crate::corpus::{Candidate, QuestionRecord, Vocabulary};
use crate::error::{Error, Result};
use crate::minigen::layers::{Dropout, Linear};
use crate::minigen::params::{checksum, Init, ParamLayout, Tensor};
use crate::minigen::stack::{EncoderStack, StackDims};
use crate::minigen::{positional_signal, Mat, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevancyConfig {
    pub d_model: usize,
    pub n_heads: usize,
    pub n_layers: usize,
    pub ffn_dim: usize,
    pub max_seq_len: usize,
    pub dropout: f64,
    pub variant: PairVariant,
    pub seed: u64,
}

impl Default for RelevancyConfig {
    fn default() -> Self {
        RelevancyConfig {
            d_model: 64,
            n_heads: 4,
            n_layers: 2,
            ffn_dim: 256,
            max_seq_len: DEFAULT_MAX_SEQ_LEN,
            dropout: 0.0,
            variant: PairVariant::QuestionAnswer,
            seed: 0,
        }
    }
}

impl RelevancyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_model == 0 || self.n_heads == 0 || !self.d_model.is_multiple_of(self.n_heads) {
            return Err(Error::InvalidArgument(format!(
                "d_model {} must be a positive multiple of n_heads {}",
                self.d_model, self.n_heads
            )));
        }
        if self.ffn_dim == 0 {
            return Err(Error::InvalidArgument("ffn_dim must be at least 1".into()));
        }
        if self.max_seq_len < 4 {
            return Err(Error::InvalidArgument("max_seq_len must be at least 4".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidArgument("dropout must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Token and segment embeddings, encoder, and a two-way head on the CLS
/// state. The head starts at zero so an untrained model is indifferent.
#[derive(Debug, Clone)]
pub struct RelevancyLayout {
    pub embedding: Tensor,
    pub segment: Tensor,
    pub encoder: EncoderStack,
    pub head: Linear,
    pub params: ParamLayout,
}

impl RelevancyLayout {
    pub fn new(config: &RelevancyConfig, vocab_size: usize) -> Self {
        let mut params = ParamLayout::default();
        let d = config.d_model;
        let std = 1.0 / (d as f64).sqrt();
        let embedding = params.tensor("embedding", vocab_size, d, Init::Normal(std));
        let segment = params.tensor("segment", 2, d, Init::Normal(std));
        let encoder = EncoderStack::new(
            &mut params,
            "encoder",
            StackDims {
                d_model: d,
                heads: config.n_heads,
                ffn_dim: config.ffn_dim,
                layers: config.n_layers,
            },
        );
        let head = Linear {
            w: params.tensor("head.w", d, 2, Init::Zeros),
            b: params.tensor("head.b", 1, 2, Init::Zeros),
        };
        RelevancyLayout {
            embedding,
            segment,
            encoder,
            head,
            params,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RelevancyModel {
    pub config: RelevancyConfig,
    pub vocab: Vocabulary,
    pub layout: RelevancyLayout,
    pub data: Vec<f64>,
    /// Optimizer settings of the run that produced these weights.
    pub trained_with: Option<TrainConfig>,
    positions: Mat,
}

impl RelevancyModel {
    pub fn new(config: RelevancyConfig, vocab: Vocabulary) -> Result<Self> {
        config.validate()?;
        let layout = RelevancyLayout::new(&config, vocab.len());
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let data = layout.params.initialize(&mut rng);
        Self::from_data(config, vocab, data)
    }

    pub fn from_data(config: RelevancyConfig, vocab: Vocabulary, data: Vec<f64>) -> Result<Self> {
        config.validate()?;
        let layout = RelevancyLayout::new(&config, vocab.len());
        if data.len() != layout.params.size {
            return Err(Error::Artifact(format!(
                "relevancy model expects {} parameters, found {}",
                layout.params.size,
                data.len()
            )));
        }
        let positions = positional_signal(config.max_seq_len, config.d_model);
        Ok(RelevancyModel {
            config,
            vocab,
            layout,
            data,
            trained_with: None,
            positions,
        })
    }

    pub fn num_params(&self) -> usize {
        self.data.len()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn checksum(&self) -> String {
        checksum(&self.data)
    }

    pub fn pair(&self, question: &QuestionRecord, candidate: &Candidate) -> PairInput {
        format_pair(
            question,
            candidate,
            self.config.variant,
            &self.vocab,
            self.config.max_seq_len,
        )
    }

    fn embed(&self, ids: &[u32], segs: &[u8]) -> Mat {
        let d = self.config.d_model;
        let scale = (d as f64).sqrt();
        let emb = self.layout.embedding.view(&self.data);
        let seg = self.layout.segment.view(&self.data);
        let mut x = Mat::zeros(ids.len(), d);
        for (t, (&id, &s)) in ids.iter().zip(segs).enumerate() {
            let e = &emb[id as usize * d..(id as usize + 1) * d];
            let sv = &seg[s as usize * d..(s as usize + 1) * d];
            let pos = self.positions.row(t);
            for (c, o) in x.row_mut(t).iter_mut().enumerate() {
                *o = e[c] * scale + sv[c] + pos[c];
            }
        }
        x
    }

    fn embed_backward(&self, g: &mut [f64], ids: &[u32], segs: &[u8], dx: &Mat) {
        let d = self.config.d_model;
        let scale = (d as f64).sqrt();
        for (t, (&id, &s)) in ids.iter().zip(segs).enumerate() {
            let ge = self.layout.embedding.view_mut(g);
            for (o, v) in ge[id as usize * d..(id as usize + 1) * d].iter_mut().zip(dx.row(t)) {
                *o += v * scale;
            }
            let gs = self.layout.segment.view_mut(g);
            for (o, v) in gs[s as usize * d..(s as usize + 1) * d].iter_mut().zip(dx.row(t)) {
                *o += v;
            }
        }
    }

    fn sequence(&self, pair: &PairInput) -> (Vec<u32>, Vec<u8>) {
        let (mut ids, mut segs) = pair.sequence();
        // Pairs built elsewhere may exceed the limit; cut from the tail.
        ids.truncate(self.config.max_seq_len);
        segs.truncate(self.config.max_seq_len);
        for id in &mut ids {
            if *id as usize >= self.vocab.len() {
                *id = crate::corpus::UNK;
            }
        }
        (ids, segs)
    }

    /// Raw two-class logits: index 1 is "relevant".
    pub fn logits(&self, pair: &PairInput) -> [f64; 2] {
        let (ids, segs) = self.sequence(pair);
        let x = self.embed(&ids, &segs);
        let (h, _) = self.layout.encoder.forward(&self.data, &x, &mut None);
        let pooled = Mat::from_vec(1, h.cols, h.row(0).to_vec());
        let y = self.layout.head.apply(&self.data, &pooled);
        [y.data[0], y.data[1]]
    }

    /// `[P(irrelevant), P(relevant)]`.
    pub fn probabilities(&self, pair: &PairInput) -> [f64; 2] {
        softmax2(self.logits(pair))
    }

    /// Probability that the candidate is relevant.
    pub fn score_pair(&self, pair: &PairInput) -> f64 {
        self.probabilities(pair)[1]
    }

    /// Two-class cross-entropy of one pair.
    pub fn pair_loss(&self, pair: &PairInput, relevant: bool) -> f64 {
        let l = self.logits(pair);
        let m = l[0].max(l[1]);
        let lse = m + ((l[0] - m).exp() + (l[1] - m).exp()).ln();
        lse - l[relevant as usize]
    }

    pub fn loss_and_grad(&self, pair: &PairInput, relevant: bool, drop: &mut Option<Dropout<'_>>) -> (f64, Vec<f64>) {
        let (ids, segs) = self.sequence(pair);
        let x = self.embed(&ids, &segs);
        let (h, cache) = self.layout.encoder.forward(&self.data, &x, drop);
        let d = h.cols;
        let pooled = Mat::from_vec(1, d, h.row(0).to_vec());
        let y = self.layout.head.apply(&self.data, &pooled);
        let l = [y.data[0], y.data[1]];
        let p = softmax2(l);
        let target = relevant as usize;
        let m = l[0].max(l[1]);
        let loss = m + ((l[0] - m).exp() + (l[1] - m).exp()).ln() - l[target];

        let mut g = vec![0.0; self.data.len()];
        let mut dl = Mat::from_vec(1, 2, p.to_vec());
        dl.data[target] -= 1.0;
        let dpooled = self.layout.head.backward(&self.data, &mut g, &pooled, &dl);
        let mut dh = Mat::zeros(h.rows, d);
        dh.row_mut(0).copy_from_slice(&dpooled.data);
        let dx = self.layout.encoder.backward(&self.data, &mut g, &cache, &dh);
        self.embed_backward(&mut g, &ids, &segs, &dx);
        (loss, g)
    }
}

fn softmax2(l: [f64; 2]) -> [f64; 2] {
    let m = l[0].max(l[1]);
    let a = (l[0] - m).exp();
    let b = (l[1] - m).exp();
    [a / (a + b), b / (a + b)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RelevancyModel {
        let vocab = Vocabulary::from_texts(["battery camera good phone"], 50).unwrap();
        let cfg = RelevancyConfig {
            d_model: 8,
            n_heads: 2,
            n_layers: 1,
            ffn_dim: 16,
            max_seq_len: 16,
            ..Default::default()
        };
        RelevancyModel::new(cfg, vocab).unwrap()
    }

    #[test]
    fn untrained_scores_half() {
        let m = small();
        let q = QuestionRecord::new("q", "is the battery good", vec![]).unwrap();
        let p = m.pair(&q, &Candidate::review("r", "camera phone"));
        assert_eq!(m.score_pair(&p), 0.5);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut m = small();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        use rand::Rng;
        for v in m.layout.head.w.view_mut(&mut m.data) {
            *v = rng.random_range(-0.5..0.5);
        }
        let q = QuestionRecord::new("q", "is the battery good", vec![]).unwrap();
        let p = m.pair(&q, &Candidate::review("r", "battery good phone"));
        let (_, g) = m.loss_and_grad(&p, true, &mut None);
        let eps = 1e-5;
        for i in (0..m.data.len()).step_by(7) {
            let orig = m.data[i];
            m.data[i] = orig + eps;
            let up = m.pair_loss(&p, true);
            m.data[i] = orig - eps;
            let down = m.pair_loss(&p, true);
            m.data[i] = orig;
            let num = (up - down) / (2.0 * eps);
            assert!(
                (num - g[i]).abs() < 1e-6 * (1.0 + num.abs()),
                "param {i}: {num} vs {}",
                g[i]
            );
        }
    }
}

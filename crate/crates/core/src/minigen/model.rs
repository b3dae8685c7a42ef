use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::Dropout;
use super::params::{Init, ParamLayout, Tensor};
use super::positional::positional_signal;
use super::stack::{DecoderCache, DecoderStack, EncoderCache, EncoderStack, StackDims};
use super::tensor::{log_sum_exp, matmul, matmul_nt, matmul_tn_acc, softmax_in_place, Mat};
use crate::corpus::{Vocabulary, BOS, EOS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub d_model: usize,
    pub n_heads: usize,
    pub n_encoder_layers: usize,
    pub n_decoder_layers: usize,
    pub ffn_dim: usize,
    pub max_src_len: usize,
    pub max_tgt_len: usize,
    pub dropout: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            d_model: 64,
            n_heads: 4,
            n_encoder_layers: 2,
            n_decoder_layers: 2,
            ffn_dim: 256,
            max_src_len: 256,
            max_tgt_len: 48,
            dropout: 0.0,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("d_model", self.d_model),
            ("n_heads", self.n_heads),
            ("n_encoder_layers", self.n_encoder_layers),
            ("n_decoder_layers", self.n_decoder_layers),
            ("ffn_dim", self.ffn_dim),
            ("max_src_len", self.max_src_len),
            ("max_tgt_len", self.max_tgt_len),
        ];
        if let Some((name, _)) = dims.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
        }
        if !self.d_model.is_multiple_of(self.n_heads) {
            return Err(Error::InvalidArgument(format!(
                "d_model {} is not divisible by n_heads {}",
                self.d_model, self.n_heads
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidArgument("dropout must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Where each tensor of the generator lives in the flat parameter vector.
/// The token embedding doubles as the output projection.
#[derive(Debug, Clone)]
pub struct GeneratorLayout {
    pub embedding: Tensor,
    pub encoder: EncoderStack,
    pub decoder: DecoderStack,
    pub params: ParamLayout,
}

impl GeneratorLayout {
    pub fn new(config: &GeneratorConfig, vocab_size: usize) -> Self {
        let mut params = ParamLayout::default();
        let d = config.d_model;
        let embedding = params.tensor("embedding", vocab_size, d, Init::Normal(1.0 / (d as f64).sqrt()));
        let enc_dims = StackDims {
            d_model: d,
            heads: config.n_heads,
            ffn_dim: config.ffn_dim,
            layers: config.n_encoder_layers,
        };
        let encoder = EncoderStack::new(&mut params, "encoder", enc_dims);
        let decoder = DecoderStack::new(
            &mut params,
            "decoder",
            StackDims {
                layers: config.n_decoder_layers,
                ..enc_dims
            },
        );
        GeneratorLayout {
            embedding,
            encoder,
            decoder,
            params,
        }
    }
}

/// All weights of the encoder-decoder generator.
/// Attention weights indexed by layer, then head.
pub type AttentionMaps = Vec<Vec<Mat>>;

#[derive(Debug, Clone)]
pub struct GeneratorParams {
    pub config: GeneratorConfig,
    pub vocab_size: usize,
    pub layout: GeneratorLayout,
    pub data: Vec<f64>,
    positions: Mat,
}

/// One training pair, ids only. `tgt` starts with BOS and ends with EOS.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seq2SeqExample {
    pub src: Vec<u32>,
    pub tgt: Vec<u32>,
}

impl Seq2SeqExample {
    /// Tokenizes and truncates to the configured lengths (source from the
    /// tail, target keeping BOS/EOS).
    pub fn from_text(vocab: &Vocabulary, source: &str, target: &str, config: &GeneratorConfig) -> Self {
        let mut src = vocab.tokenize(source);
        if src.len() > config.max_src_len {
            log::debug!("truncating source from {} to {} tokens", src.len(), config.max_src_len);
            src.truncate(config.max_src_len);
        }
        let mut body = vocab.tokenize(target);
        body.truncate(config.max_tgt_len.saturating_sub(2));
        let mut tgt = Vec::with_capacity(body.len() + 2);
        tgt.push(BOS);
        tgt.extend(body);
        tgt.push(EOS);
        Seq2SeqExample { src, tgt }
    }
}

/// Forward state kept for backprop.
pub(crate) struct ForwardPass {
    src_cache: EncoderCache,
    memory: Mat,
    dec_cache: DecoderCache,
    dec_out: Mat,
    pub logits: Mat,
}

impl GeneratorParams {
    pub fn new(config: GeneratorConfig, vocab_size: usize) -> Result<Self> {
        config.validate()?;
        let layout = GeneratorLayout::new(&config, vocab_size);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let data = layout.params.initialize(&mut rng);
        Ok(Self::assemble(config, vocab_size, layout, data))
    }

    pub fn from_data(config: GeneratorConfig, vocab_size: usize, data: Vec<f64>) -> Result<Self> {
        config.validate()?;
        let layout = GeneratorLayout::new(&config, vocab_size);
        if data.len() != layout.params.size {
            return Err(Error::Artifact(format!(
                "expected {} generator parameters, found {}",
                layout.params.size,
                data.len()
            )));
        }
        Ok(Self::assemble(config, vocab_size, layout, data))
    }

    fn assemble(config: GeneratorConfig, vocab_size: usize, layout: GeneratorLayout, data: Vec<f64>) -> Self {
        let positions = positional_signal(config.max_src_len.max(config.max_tgt_len), config.d_model);
        GeneratorParams {
            config,
            vocab_size,
            layout,
            data,
            positions,
        }
    }

    pub fn num_params(&self) -> usize {
        self.data.len()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn checksum(&self) -> String {
        super::params::checksum(&self.data)
    }

    pub(crate) fn embed(&self, ids: &[u32]) -> Mat {
        let d = self.config.d_model;
        let scale = (d as f64).sqrt();
        let emb = self.layout.embedding.view(&self.data);
        let mut x = Mat::zeros(ids.len(), d);
        for (t, &id) in ids.iter().enumerate() {
            let e = &emb[id as usize * d..(id as usize + 1) * d];
            let pos = self.positions.row(t);
            for ((o, ev), pv) in x.row_mut(t).iter_mut().zip(e).zip(pos) {
                *o = ev * scale + pv;
            }
        }
        x
    }

    fn embed_backward(&self, g: &mut [f64], ids: &[u32], dx: &Mat) {
        let d = self.config.d_model;
        let scale = (d as f64).sqrt();
        let ge = self.layout.embedding.view_mut(g);
        for (t, &id) in ids.iter().enumerate() {
            let row = &mut ge[id as usize * d..(id as usize + 1) * d];
            for (o, v) in row.iter_mut().zip(dx.row(t)) {
                *o += v * scale;
            }
        }
    }

    fn check_src(&self, src: &[u32]) -> Result<()> {
        if src.is_empty() {
            return Err(Error::InvalidArgument("encoder input is empty".into()));
        }
        if src.len() > self.config.max_src_len {
            return Err(Error::InvalidArgument(format!(
                "source length {} exceeds max_src_len {}",
                src.len(),
                self.config.max_src_len
            )));
        }
        self.check_ids(src)
    }

    fn check_ids(&self, ids: &[u32]) -> Result<()> {
        match ids.iter().find(|&&i| i as usize >= self.vocab_size) {
            Some(i) => Err(Error::InvalidArgument(format!(
                "token id {i} outside vocabulary of {}",
                self.vocab_size
            ))),
            None => Ok(()),
        }
    }

    fn check_prefix(&self, prefix: &[u32]) -> Result<()> {
        if prefix.is_empty() {
            return Err(Error::InvalidArgument("decoder prefix is empty".into()));
        }
        if prefix.len() > self.config.max_tgt_len {
            return Err(Error::InvalidArgument(format!(
                "prefix length {} exceeds max_tgt_len {}",
                prefix.len(),
                self.config.max_tgt_len
            )));
        }
        self.check_ids(prefix)
    }

    /// Encoder hidden states, one row per source token.
    pub fn encode(&self, src: &[u32]) -> Result<Mat> {
        self.check_src(src)?;
        Ok(self.layout.encoder.forward(&self.data, &self.embed(src), &mut None).0)
    }

    /// Same as [`encode`](Self::encode) plus the per-layer attention weights.
    pub fn encode_traced(&self, src: &[u32]) -> Result<(Mat, Vec<Vec<Mat>>)> {
        self.check_src(src)?;
        let (h, cache) = self.layout.encoder.forward(&self.data, &self.embed(src), &mut None);
        Ok((h, cache.attention_weights().map(|w| w.to_vec()).collect()))
    }

    fn project(&self, z: &Mat) -> Mat {
        matmul_nt(z, self.layout.embedding.view(&self.data), self.vocab_size)
    }

    /// Logits for every position of `prefix` at once (teacher forcing):
    /// row `t` predicts the token after `prefix[t]`.
    pub fn decode_all(&self, memory: &Mat, prefix: &[u32]) -> Result<Mat> {
        self.check_prefix(prefix)?;
        let (z, _) = self
            .layout
            .decoder
            .forward(&self.data, &self.embed(prefix), memory, &mut None);
        Ok(self.project(&z))
    }

    /// Decoder self- and cross-attention weights for a teacher-forced pass,
    /// per layer and head.
    pub fn decode_traced(&self, memory: &Mat, prefix: &[u32]) -> Result<(AttentionMaps, AttentionMaps)> {
        self.check_prefix(prefix)?;
        let (_, cache) = self
            .layout
            .decoder
            .forward(&self.data, &self.embed(prefix), memory, &mut None);
        Ok((
            cache.self_attention_weights().map(|w| w.to_vec()).collect(),
            cache.cross_attention_weights().map(|w| w.to_vec()).collect(),
        ))
    }

    /// Next-token logits after `prefix`, which must start with BOS.
    pub fn decode_step(&self, memory: &Mat, prefix: &[u32]) -> Result<Vec<f64>> {
        let logits = self.decode_all(memory, prefix)?;
        Ok(logits.row(logits.rows - 1).to_vec())
    }

    pub(crate) fn forward(&self, ex: &Seq2SeqExample, drop: &mut Option<Dropout<'_>>) -> Result<ForwardPass> {
        self.check_src(&ex.src)?;
        if ex.tgt.len() < 2 {
            return Err(Error::InvalidArgument("target needs at least BOS and one token".into()));
        }
        let input = &ex.tgt[..ex.tgt.len() - 1];
        self.check_prefix(input)?;
        self.check_ids(&ex.tgt)?;
        let (memory, src_cache) = self.layout.encoder.forward(&self.data, &self.embed(&ex.src), drop);
        let (dec_out, dec_cache) = self
            .layout
            .decoder
            .forward(&self.data, &self.embed(input), &memory, drop);
        let logits = self.project(&dec_out);
        Ok(ForwardPass {
            src_cache,
            memory,
            dec_cache,
            dec_out,
            logits,
        })
    }

    /// Mean negative log-likelihood of the target tokens under teacher forcing.
    pub fn loss(&self, ex: &Seq2SeqExample) -> Result<f64> {
        let fwd = self.forward(ex, &mut None)?;
        Ok(nll(&fwd.logits, &ex.tgt[1..]))
    }

    /// Mean of the per-example losses.
    pub fn batch_loss(&self, batch: &[Seq2SeqExample]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        let mut total = 0.0;
        for ex in batch {
            total += self.loss(ex)?;
        }
        Ok(total / batch.len() as f64)
    }

    /// Loss and its gradient with respect to every parameter.
    pub fn loss_and_grad(&self, ex: &Seq2SeqExample, drop: &mut Option<Dropout<'_>>) -> Result<(f64, Vec<f64>)> {
        let fwd = self.forward(ex, drop)?;
        let targets = &ex.tgt[1..];
        let loss = nll(&fwd.logits, targets);
        let mut g = vec![0.0; self.data.len()];

        let steps = targets.len() as f64;
        let mut dlogits = fwd.logits.clone();
        for (t, &y) in targets.iter().enumerate() {
            let row = dlogits.row_mut(t);
            softmax_in_place(row);
            row[y as usize] -= 1.0;
            row.iter_mut().for_each(|v| *v /= steps);
        }
        // logits = z E^T
        let dz = matmul(&dlogits, self.layout.embedding.view(&self.data), self.config.d_model);
        matmul_tn_acc(&dlogits, &fwd.dec_out, self.layout.embedding.view_mut(&mut g));

        let input = &ex.tgt[..ex.tgt.len() - 1];
        let (dy, dmem) = self
            .layout
            .decoder
            .backward(&self.data, &mut g, &fwd.dec_cache, &dz, fwd.memory.rows);
        self.embed_backward(&mut g, input, &dy);
        let dx = self.layout.encoder.backward(&self.data, &mut g, &fwd.src_cache, &dmem);
        self.embed_backward(&mut g, &ex.src, &dx);
        Ok((loss, g))
    }

    /// Fraction of target tokens predicted exactly under teacher forcing.
    pub fn token_accuracy(&self, examples: &[Seq2SeqExample]) -> Result<f64> {
        let mut hits = 0usize;
        let mut total = 0usize;
        for ex in examples {
            let fwd = self.forward(ex, &mut None)?;
            for (t, &y) in ex.tgt[1..].iter().enumerate() {
                hits += (argmax(fwd.logits.row(t)) == y as usize) as usize;
                total += 1;
            }
        }
        Ok(if total == 0 { 0.0 } else { hits as f64 / total as f64 })
    }
}

/// Mean over rows of `-log softmax(row)[target]`.
pub(crate) fn nll(logits: &Mat, targets: &[u32]) -> f64 {
    let mut total = 0.0;
    for (t, &y) in targets.iter().enumerate() {
        let row = logits.row(t);
        total += log_sum_exp(row) - row[y as usize];
    }
    total / targets.len() as f64
}

/// Index of the first maximum.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

impl GeneratorParams {
    /// Scaled embedding of one token at position `pos`.
    pub(crate) fn embed_at(&self, id: u32, pos: usize) -> Mat {
        let d = self.config.d_model;
        let scale = (d as f64).sqrt();
        let emb = &self.layout.embedding.view(&self.data)[id as usize * d..(id as usize + 1) * d];
        let row = emb
            .iter()
            .zip(self.positions.row(pos))
            .map(|(e, p)| e * scale + p)
            .collect();
        Mat::from_vec(1, d, row)
    }

    pub(crate) fn project_row(&self, z: &Mat) -> Vec<f64> {
        self.project(z).data
    }
}

//! Autoregressive decoding with cached keys and values.

use serde::{Deserialize, Serialize};

use super::model::{argmax, GeneratorParams};
use super::tensor::{dot, log_sum_exp, softmax_in_place, Mat};
use crate::corpus::{BOS, EOS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Greedy,
    Beam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeConfig {
    pub strategy: Strategy,
    pub beam_width: usize,
    /// Maximum number of generated tokens, EOS excluded. Clamped to the
    /// model's `max_tgt_len`.
    pub max_len: usize,
    /// Exponent `a` of the `((5 + len) / 6)^a` normalizer used to compare
    /// beam hypotheses of different lengths.
    pub length_penalty: f64,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            strategy: Strategy::Greedy,
            beam_width: 4,
            max_len: 48,
            length_penalty: 0.6,
        }
    }
}

impl DecodeConfig {
    pub fn greedy(max_len: usize) -> Self {
        DecodeConfig {
            max_len,
            ..Default::default()
        }
    }

    pub fn beam(width: usize, max_len: usize) -> Self {
        DecodeConfig {
            strategy: Strategy::Beam,
            beam_width: width,
            max_len,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.beam_width == 0 {
            return Err(Error::InvalidArgument("beam width must be at least 1".into()));
        }
        Ok(())
    }
}

/// Decoder state that feeds one token at a time, caching the self-attention
/// keys/values of earlier positions and the cross-attention projections of
/// the encoder output.
#[derive(Clone)]
pub struct IncrementalDecoder<'a> {
    params: &'a GeneratorParams,
    cross: Vec<(Mat, Mat)>,
    keys: Vec<Vec<f64>>,
    values: Vec<Vec<f64>>,
    len: usize,
}

fn attend(q: &[f64], keys: &[f64], values: &[f64], heads: usize) -> Vec<f64> {
    let d = q.len();
    let dh = d / heads;
    let n = keys.len() / d;
    let scale = 1.0 / (dh as f64).sqrt();
    let mut out = vec![0.0; d];
    let mut w = vec![0.0; n];
    for h in 0..heads {
        let cols = h * dh..(h + 1) * dh;
        for (j, wj) in w.iter_mut().enumerate() {
            *wj = dot(&q[cols.clone()], &keys[j * d..(j + 1) * d][cols.clone()]) * scale;
        }
        softmax_in_place(&mut w);
        for (j, &wj) in w.iter().enumerate() {
            let v = &values[j * d..(j + 1) * d][cols.clone()];
            for (o, vv) in out[cols.clone()].iter_mut().zip(v) {
                *o += wj * vv;
            }
        }
    }
    out
}

impl<'a> IncrementalDecoder<'a> {
    pub fn new(params: &'a GeneratorParams, memory: &Mat) -> Self {
        let p = &params.data;
        let cross = params
            .layout
            .decoder
            .layers
            .iter()
            .map(|l| (l.cross_attn.k.apply(p, memory), l.cross_attn.v.apply(p, memory)))
            .collect();
        let n = params.layout.decoder.layers.len();
        IncrementalDecoder {
            params,
            cross,
            keys: vec![Vec::new(); n],
            values: vec![Vec::new(); n],
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Feeds `token` at the next position and returns next-token logits.
    pub fn step(&mut self, token: u32) -> Result<Vec<f64>> {
        if self.len >= self.params.config.max_tgt_len {
            return Err(Error::InvalidArgument(format!(
                "decoder is limited to {} positions",
                self.params.config.max_tgt_len
            )));
        }
        let p = &self.params.data;
        let mut x = self.params.embed_at(token, self.len);
        for (l, layer) in self.params.layout.decoder.layers.iter().enumerate() {
            let a = layer.norm_self.apply(p, &x);
            let q = layer.self_attn.q.apply(p, &a);
            self.keys[l].extend(layer.self_attn.k.apply(p, &a).data);
            self.values[l].extend(layer.self_attn.v.apply(p, &a).data);
            let o = attend(&q.data, &self.keys[l], &self.values[l], layer.self_attn.heads);
            x.add_assign(&layer.self_attn.o.apply(p, &Mat::from_vec(1, o.len(), o)));

            let b = layer.norm_cross.apply(p, &x);
            let q = layer.cross_attn.q.apply(p, &b);
            let (ck, cv) = &self.cross[l];
            let o = attend(&q.data, &ck.data, &cv.data, layer.cross_attn.heads);
            x.add_assign(&layer.cross_attn.o.apply(p, &Mat::from_vec(1, o.len(), o)));

            let d = layer.norm_ffn.apply(p, &x);
            x.add_assign(&layer.ffn.forward(p, &d).0);
        }
        let z = self.params.layout.decoder.final_norm.apply(p, &x);
        self.len += 1;
        Ok(self.params.project_row(&z))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generation {
    pub tokens: Vec<u32>,
    pub log_prob: f64,
    pub steps: usize,
    pub hit_eos: bool,
}

fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(logits);
    logits.iter().map(|x| x - lse).collect()
}

fn length_norm(len: usize, alpha: f64) -> f64 {
    ((5.0 + len as f64) / 6.0).powf(alpha)
}

/// Generates an answer for `src`; greedy picks the argmax each step, beam
/// keeps the `beam_width` best partial hypotheses by summed log-probability.
pub fn generate_detailed(params: &GeneratorParams, src: &[u32], cfg: &DecodeConfig) -> Result<Generation> {
    cfg.validate()?;
    let memory = params.encode(src)?;
    let max_len = cfg.max_len.min(params.config.max_tgt_len);
    match cfg.strategy {
        Strategy::Greedy => greedy(params, &memory, max_len),
        Strategy::Beam => beam(params, &memory, max_len, cfg.beam_width, cfg.length_penalty),
    }
}

pub fn generate(params: &GeneratorParams, src: &[u32], cfg: &DecodeConfig) -> Result<Vec<u32>> {
    Ok(generate_detailed(params, src, cfg)?.tokens)
}

fn greedy(params: &GeneratorParams, memory: &Mat, max_len: usize) -> Result<Generation> {
    let mut dec = IncrementalDecoder::new(params, memory);
    let mut logits = dec.step(BOS)?;
    let mut out = Generation {
        tokens: Vec::new(),
        log_prob: 0.0,
        steps: 0,
        hit_eos: false,
    };
    while out.steps < max_len {
        let tok = argmax(&logits);
        out.log_prob += logits[tok] - log_sum_exp(&logits);
        out.steps += 1;
        if tok as u32 == EOS {
            out.hit_eos = true;
            break;
        }
        out.tokens.push(tok as u32);
        if out.tokens.len() == max_len {
            break;
        }
        logits = dec.step(tok as u32)?;
    }
    Ok(out)
}

struct Hyp<'a> {
    tokens: Vec<u32>,
    log_prob: f64,
    state: IncrementalDecoder<'a>,
    logits: Vec<f64>,
}

fn beam(params: &GeneratorParams, memory: &Mat, max_len: usize, width: usize, alpha: f64) -> Result<Generation> {
    let mut state = IncrementalDecoder::new(params, memory);
    let logits = state.step(BOS)?;
    let mut alive = vec![Hyp {
        tokens: Vec::new(),
        log_prob: 0.0,
        state,
        logits,
    }];
    let mut finished: Vec<Generation> = Vec::new();
    let mut steps = 0;
    while steps < max_len && !alive.is_empty() && finished.len() < width {
        steps += 1;
        let mut expansions: Vec<(f64, usize, u32)> = Vec::with_capacity(alive.len() * params.vocab_size);
        for (hi, h) in alive.iter().enumerate() {
            for (tok, lp) in log_softmax(&h.logits).into_iter().enumerate() {
                expansions.push((h.log_prob + lp, hi, tok as u32));
            }
        }
        expansions.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut next = Vec::with_capacity(width);
        for &(score, hi, tok) in expansions.iter().take(width) {
            let parent = &alive[hi];
            if tok == EOS {
                finished.push(Generation {
                    tokens: parent.tokens.clone(),
                    log_prob: score,
                    steps,
                    hit_eos: true,
                });
                continue;
            }
            let mut tokens = parent.tokens.clone();
            tokens.push(tok);
            let mut state = parent.state.clone();
            let logits = if tokens.len() < max_len {
                state.step(tok)?
            } else {
                Vec::new()
            };
            next.push(Hyp {
                tokens,
                log_prob: score,
                state,
                logits,
            });
        }
        if next.iter().any(|h| h.tokens.len() >= max_len) {
            finished.extend(next.drain(..).map(|h| Generation {
                tokens: h.tokens,
                log_prob: h.log_prob,
                steps,
                hit_eos: false,
            }));
        }
        alive = next;
    }
    finished.extend(alive.into_iter().map(|h| Generation {
        tokens: h.tokens,
        log_prob: h.log_prob,
        steps,
        hit_eos: false,
    }));
    let score = |g: &Generation| g.log_prob / length_norm(g.tokens.len() + g.hit_eos as usize, alpha);
    let mut best = 0;
    for (i, g) in finished.iter().enumerate() {
        if score(g) > score(&finished[best]) {
            best = i;
        }
    }
    Ok(finished.swap_remove(best))
}

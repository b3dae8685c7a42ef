//! Pre-norm encoder and decoder stacks.
//!
//! Each sub-layer sees a layer-normalized copy of its input and its output
//! is added back onto the residual stream. A final layer norm closes each
//! stack.

use super::layers::{
    dropout, dropout_backward, Attention, AttentionCache, Dropout, FeedForward, FeedForwardCache, LayerNorm,
    LayerNormCache,
};
use super::params::ParamLayout;
use super::tensor::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StackDims {
    pub d_model: usize,
    pub heads: usize,
    pub ffn_dim: usize,
    pub layers: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct EncoderLayer {
    pub norm_attn: LayerNorm,
    pub attn: Attention,
    pub norm_ffn: LayerNorm,
    pub ffn: FeedForward,
}

pub struct EncoderLayerCache {
    ln1: LayerNormCache,
    attn: AttentionCache,
    drop1: Option<Vec<f64>>,
    ln2: LayerNormCache,
    ffn: FeedForwardCache,
    drop2: Option<Vec<f64>>,
}

impl EncoderLayer {
    fn new(layout: &mut ParamLayout, name: &str, dims: StackDims) -> Self {
        EncoderLayer {
            norm_attn: LayerNorm::new(layout, &format!("{name}.norm_attn"), dims.d_model),
            attn: Attention::new(layout, &format!("{name}.attn"), dims.d_model, dims.heads),
            norm_ffn: LayerNorm::new(layout, &format!("{name}.norm_ffn"), dims.d_model),
            ffn: FeedForward::new(layout, &format!("{name}.ffn"), dims.d_model, dims.ffn_dim),
        }
    }

    fn forward(&self, p: &[f64], x: &Mat, drop: &mut Option<Dropout<'_>>) -> (Mat, EncoderLayerCache) {
        let (a, ln1) = self.norm_attn.forward(p, x);
        let (mut s, attn) = self.attn.forward(p, &a, &a, false);
        let drop1 = dropout(&mut s, drop);
        let mut x1 = x.clone();
        x1.add_assign(&s);
        let (b, ln2) = self.norm_ffn.forward(p, &x1);
        let (mut f, ffn) = self.ffn.forward(p, &b);
        let drop2 = dropout(&mut f, drop);
        x1.add_assign(&f);
        (
            x1,
            EncoderLayerCache {
                ln1,
                attn,
                drop1,
                ln2,
                ffn,
                drop2,
            },
        )
    }

    fn backward(&self, p: &[f64], g: &mut [f64], c: &EncoderLayerCache, dy: &Mat) -> Mat {
        let df = dropout_backward(dy, &c.drop2);
        let db = self.ffn.backward(p, g, &c.ffn, &df);
        let mut dx1 = dy.clone();
        dx1.add_assign(&self.norm_ffn.backward(p, g, &c.ln2, &db));
        let ds = dropout_backward(&dx1, &c.drop1);
        let (mut da, dkv) = self.attn.backward(p, g, &c.attn, &ds);
        da.add_assign(&dkv);
        let mut dx = dx1;
        dx.add_assign(&self.norm_attn.backward(p, g, &c.ln1, &da));
        dx
    }
}

#[derive(Debug, Clone)]
pub struct EncoderStack {
    pub layers: Vec<EncoderLayer>,
    pub final_norm: LayerNorm,
}

pub struct EncoderCache {
    layers: Vec<EncoderLayerCache>,
    final_norm: LayerNormCache,
}

impl EncoderCache {
    /// Per-layer, per-head self-attention weights.
    pub fn attention_weights(&self) -> impl Iterator<Item = &[Mat]> {
        self.layers.iter().map(|l| l.attn.weights.as_slice())
    }
}

impl EncoderStack {
    pub fn new(layout: &mut ParamLayout, name: &str, dims: StackDims) -> Self {
        EncoderStack {
            layers: (0..dims.layers)
                .map(|i| EncoderLayer::new(layout, &format!("{name}.layer{i}"), dims))
                .collect(),
            final_norm: LayerNorm::new(layout, &format!("{name}.final_norm"), dims.d_model),
        }
    }

    pub fn forward(&self, p: &[f64], x: &Mat, drop: &mut Option<Dropout<'_>>) -> (Mat, EncoderCache) {
        let mut h = x.clone();
        let mut caches = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let (next, c) = layer.forward(p, &h, drop);
            caches.push(c);
            h = next;
        }
        let (out, final_norm) = self.final_norm.forward(p, &h);
        (
            out,
            EncoderCache {
                layers: caches,
                final_norm,
            },
        )
    }

    pub fn backward(&self, p: &[f64], g: &mut [f64], c: &EncoderCache, dy: &Mat) -> Mat {
        let mut d = self.final_norm.backward(p, g, &c.final_norm, dy);
        for (layer, lc) in self.layers.iter().zip(&c.layers).rev() {
            d = layer.backward(p, g, lc, &d);
        }
        d
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DecoderLayer {
    pub norm_self: LayerNorm,
    pub self_attn: Attention,
    pub norm_cross: LayerNorm,
    pub cross_attn: Attention,
    pub norm_ffn: LayerNorm,
    pub ffn: FeedForward,
}

pub struct DecoderLayerCache {
    ln1: LayerNormCache,
    self_attn: AttentionCache,
    drop1: Option<Vec<f64>>,
    ln2: LayerNormCache,
    cross_attn: AttentionCache,
    drop2: Option<Vec<f64>>,
    ln3: LayerNormCache,
    ffn: FeedForwardCache,
    drop3: Option<Vec<f64>>,
}

impl DecoderLayer {
    fn new(layout: &mut ParamLayout, name: &str, dims: StackDims) -> Self {
        DecoderLayer {
            norm_self: LayerNorm::new(layout, &format!("{name}.norm_self"), dims.d_model),
            self_attn: Attention::new(layout, &format!("{name}.self_attn"), dims.d_model, dims.heads),
            norm_cross: LayerNorm::new(layout, &format!("{name}.norm_cross"), dims.d_model),
            cross_attn: Attention::new(layout, &format!("{name}.cross_attn"), dims.d_model, dims.heads),
            norm_ffn: LayerNorm::new(layout, &format!("{name}.norm_ffn"), dims.d_model),
            ffn: FeedForward::new(layout, &format!("{name}.ffn"), dims.d_model, dims.ffn_dim),
        }
    }

    fn forward(&self, p: &[f64], y: &Mat, memory: &Mat, drop: &mut Option<Dropout<'_>>) -> (Mat, DecoderLayerCache) {
        let (a, ln1) = self.norm_self.forward(p, y);
        let (mut s, self_attn) = self.self_attn.forward(p, &a, &a, true);
        let drop1 = dropout(&mut s, drop);
        let mut y1 = y.clone();
        y1.add_assign(&s);
        let (b, ln2) = self.norm_cross.forward(p, &y1);
        let (mut c, cross_attn) = self.cross_attn.forward(p, &b, memory, false);
        let drop2 = dropout(&mut c, drop);
        y1.add_assign(&c);
        let (d, ln3) = self.norm_ffn.forward(p, &y1);
        let (mut f, ffn) = self.ffn.forward(p, &d);
        let drop3 = dropout(&mut f, drop);
        y1.add_assign(&f);
        (
            y1,
            DecoderLayerCache {
                ln1,
                self_attn,
                drop1,
                ln2,
                cross_attn,
                drop2,
                ln3,
                ffn,
                drop3,
            },
        )
    }

    /// Returns the gradient for the layer input; adds the memory gradient to `dmem`.
    fn backward(&self, p: &[f64], g: &mut [f64], c: &DecoderLayerCache, dy: &Mat, dmem: &mut Mat) -> Mat {
        let df = dropout_backward(dy, &c.drop3);
        let dd = self.ffn.backward(p, g, &c.ffn, &df);
        let mut dy2 = dy.clone();
        dy2.add_assign(&self.norm_ffn.backward(p, g, &c.ln3, &dd));

        let dc = dropout_backward(&dy2, &c.drop2);
        let (db, dm) = self.cross_attn.backward(p, g, &c.cross_attn, &dc);
        dmem.add_assign(&dm);
        let mut dy1 = dy2;
        dy1.add_assign(&self.norm_cross.backward(p, g, &c.ln2, &db));

        let ds = dropout_backward(&dy1, &c.drop1);
        let (mut da, dkv) = self.self_attn.backward(p, g, &c.self_attn, &ds);
        da.add_assign(&dkv);
        let mut dx = dy1;
        dx.add_assign(&self.norm_self.backward(p, g, &c.ln1, &da));
        dx
    }
}

#[derive(Debug, Clone)]
pub struct DecoderStack {
    pub layers: Vec<DecoderLayer>,
    pub final_norm: LayerNorm,
}

pub struct DecoderCache {
    layers: Vec<DecoderLayerCache>,
    final_norm: LayerNormCache,
}

impl DecoderCache {
    pub fn self_attention_weights(&self) -> impl Iterator<Item = &[Mat]> {
        self.layers.iter().map(|l| l.self_attn.weights.as_slice())
    }

    pub fn cross_attention_weights(&self) -> impl Iterator<Item = &[Mat]> {
        self.layers.iter().map(|l| l.cross_attn.weights.as_slice())
    }
}

impl DecoderStack {
    pub fn new(layout: &mut ParamLayout, name: &str, dims: StackDims) -> Self {
        DecoderStack {
            layers: (0..dims.layers)
                .map(|i| DecoderLayer::new(layout, &format!("{name}.layer{i}"), dims))
                .collect(),
            final_norm: LayerNorm::new(layout, &format!("{name}.final_norm"), dims.d_model),
        }
    }

    pub fn forward(&self, p: &[f64], y: &Mat, memory: &Mat, drop: &mut Option<Dropout<'_>>) -> (Mat, DecoderCache) {
        let mut h = y.clone();
        let mut caches = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let (next, c) = layer.forward(p, &h, memory, drop);
            caches.push(c);
            h = next;
        }
        let (out, final_norm) = self.final_norm.forward(p, &h);
        (
            out,
            DecoderCache {
                layers: caches,
                final_norm,
            },
        )
    }

    /// Returns `(d_input, d_memory)`.
    pub fn backward(&self, p: &[f64], g: &mut [f64], c: &DecoderCache, dy: &Mat, memory_rows: usize) -> (Mat, Mat) {
        let mut dmem = Mat::zeros(memory_rows, dy.cols);
        let mut d = self.final_norm.backward(p, g, &c.final_norm, dy);
        for (layer, lc) in self.layers.iter().zip(&c.layers).rev() {
            d = layer.backward(p, g, lc, &d, &mut dmem);
        }
        (d, dmem)
    }
}

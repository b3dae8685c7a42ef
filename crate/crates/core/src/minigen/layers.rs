//! Transformer building blocks with hand-written backward passes.
//!
//! Every layer is a set of [`Tensor`] handles into a flat parameter vector.
//! `forward` returns the output and a cache; `backward` consumes the cache,
//! accumulates parameter gradients into a flat gradient vector of the same
//! layout and returns the gradient with respect to the input.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::params::{Init, ParamLayout, Tensor};
use super::tensor::{matmul, matmul_nt, matmul_tn_acc, softmax_in_place, Mat};

pub const LN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy)]
pub struct Linear {
    pub w: Tensor,
    pub b: Tensor,
}

impl Linear {
    pub fn new(layout: &mut ParamLayout, name: &str, input: usize, output: usize) -> Self {
        let std = (2.0 / (input + output) as f64).sqrt();
        Linear {
            w: layout.tensor(format!("{name}.w"), input, output, Init::Normal(std)),
            b: layout.tensor(format!("{name}.b"), 1, output, Init::Zeros),
        }
    }

    pub fn apply(&self, p: &[f64], x: &Mat) -> Mat {
        let mut y = matmul(x, self.w.view(p), self.w.cols);
        let b = self.b.view(p);
        for r in 0..y.rows {
            for (v, bb) in y.row_mut(r).iter_mut().zip(b) {
                *v += bb;
            }
        }
        y
    }

    /// `x` is the input seen by `apply`.
    pub fn backward(&self, p: &[f64], g: &mut [f64], x: &Mat, dy: &Mat) -> Mat {
        matmul_tn_acc(x, dy, self.w.view_mut(g));
        let gb = self.b.view_mut(g);
        for r in 0..dy.rows {
            for (acc, d) in gb.iter_mut().zip(dy.row(r)) {
                *acc += d;
            }
        }
        matmul_nt(dy, self.w.view(p), self.w.rows)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LayerNorm {
    pub gain: Tensor,
    pub bias: Tensor,
}

pub struct LayerNormCache {
    xhat: Mat,
    inv_std: Vec<f64>,
}

impl LayerNorm {
    pub fn new(layout: &mut ParamLayout, name: &str, dim: usize) -> Self {
        LayerNorm {
            gain: layout.tensor(format!("{name}.gain"), 1, dim, Init::Ones),
            bias: layout.tensor(format!("{name}.bias"), 1, dim, Init::Zeros),
        }
    }

    pub fn forward(&self, p: &[f64], x: &Mat) -> (Mat, LayerNormCache) {
        let (g, b) = (self.gain.view(p), self.bias.view(p));
        let n = x.cols as f64;
        let mut xhat = Mat::zeros(x.rows, x.cols);
        let mut y = Mat::zeros(x.rows, x.cols);
        let mut inv_std = Vec::with_capacity(x.rows);
        for r in 0..x.rows {
            let row = x.row(r);
            let mean = row.iter().sum::<f64>() / n;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let inv = 1.0 / (var + LN_EPS).sqrt();
            inv_std.push(inv);
            let xh = xhat.row_mut(r);
            for (o, v) in xh.iter_mut().zip(row) {
                *o = (v - mean) * inv;
            }
            for (c, o) in y.row_mut(r).iter_mut().enumerate() {
                *o = g[c] * xhat.get(r, c) + b[c];
            }
        }
        (y, LayerNormCache { xhat, inv_std })
    }

    pub fn apply(&self, p: &[f64], x: &Mat) -> Mat {
        self.forward(p, x).0
    }

    pub fn backward(&self, p: &[f64], g: &mut [f64], cache: &LayerNormCache, dy: &Mat) -> Mat {
        let gain = self.gain.view(p);
        let n = dy.cols;
        {
            let gg = self.gain.view_mut(g);
            for r in 0..dy.rows {
                for (c, acc) in gg.iter_mut().enumerate().take(n) {
                    *acc += dy.get(r, c) * cache.xhat.get(r, c);
                }
            }
        }
        {
            let gb = self.bias.view_mut(g);
            for r in 0..dy.rows {
                for (acc, d) in gb.iter_mut().zip(dy.row(r)) {
                    *acc += d;
                }
            }
        }
        let mut dx = Mat::zeros(dy.rows, n);
        let mut dxhat = vec![0.0; n];
        for r in 0..dy.rows {
            let xh = cache.xhat.row(r);
            for c in 0..n {
                dxhat[c] = dy.get(r, c) * gain[c];
            }
            let sum: f64 = dxhat.iter().sum();
            let sum_x: f64 = dxhat.iter().zip(xh).map(|(a, b)| a * b).sum();
            let inv = cache.inv_std[r];
            let nf = n as f64;
            for (c, o) in dx.row_mut(r).iter_mut().enumerate() {
                *o = inv / nf * (nf * dxhat[c] - sum - xh[c] * sum_x);
            }
        }
        dx
    }
}

/// Multi-head scaled dot-product attention with separate query and
/// key/value inputs (equal for self-attention).
#[derive(Debug, Clone, Copy)]
pub struct Attention {
    pub q: Linear,
    pub k: Linear,
    pub v: Linear,
    pub o: Linear,
    pub heads: usize,
}

pub struct AttentionCache {
    xq: Mat,
    xkv: Mat,
    q: Mat,
    k: Mat,
    v: Mat,
    /// One `(Lq x Lk)` weight matrix per head.
    pub weights: Vec<Mat>,
    concat: Mat,
}

impl Attention {
    pub fn new(layout: &mut ParamLayout, name: &str, d_model: usize, heads: usize) -> Self {
        Attention {
            q: Linear::new(layout, &format!("{name}.q"), d_model, d_model),
            k: Linear::new(layout, &format!("{name}.k"), d_model, d_model),
            v: Linear::new(layout, &format!("{name}.v"), d_model, d_model),
            o: Linear::new(layout, &format!("{name}.o"), d_model, d_model),
            heads,
        }
    }

    fn head_dim(&self) -> usize {
        self.q.w.cols / self.heads
    }

    pub fn forward(&self, p: &[f64], xq: &Mat, xkv: &Mat, causal: bool) -> (Mat, AttentionCache) {
        let q = self.q.apply(p, xq);
        let k = self.k.apply(p, xkv);
        let v = self.v.apply(p, xkv);
        let dh = self.head_dim();
        let scale = 1.0 / (dh as f64).sqrt();
        let mut concat = Mat::zeros(xq.rows, q.cols);
        let mut weights = Vec::with_capacity(self.heads);
        for h in 0..self.heads {
            let qh = q.columns(h * dh, dh);
            let kh = k.columns(h * dh, dh);
            let vh = v.columns(h * dh, dh);
            let mut s = matmul_nt(&qh, &kh.data, kh.rows);
            for i in 0..s.rows {
                let row = s.row_mut(i);
                for (j, x) in row.iter_mut().enumerate() {
                    *x = if causal && j > i { f64::NEG_INFINITY } else { *x * scale };
                }
                softmax_in_place(row);
            }
            let oh = matmul(&s, &vh.data, dh);
            concat.set_columns(h * dh, &oh);
            weights.push(s);
        }
        let out = self.o.apply(p, &concat);
        (
            out,
            AttentionCache {
                xq: xq.clone(),
                xkv: xkv.clone(),
                q,
                k,
                v,
                weights,
                concat,
            },
        )
    }

    /// Returns `(d_xq, d_xkv)`.
    pub fn backward(&self, p: &[f64], g: &mut [f64], c: &AttentionCache, dy: &Mat) -> (Mat, Mat) {
        let dconcat = self.o.backward(p, g, &c.concat, dy);
        let dh = self.head_dim();
        let scale = 1.0 / (dh as f64).sqrt();
        let mut dq = Mat::zeros(c.q.rows, c.q.cols);
        let mut dk = Mat::zeros(c.k.rows, c.k.cols);
        let mut dv = Mat::zeros(c.v.rows, c.v.cols);
        for h in 0..self.heads {
            let a = &c.weights[h];
            let qh = c.q.columns(h * dh, dh);
            let kh = c.k.columns(h * dh, dh);
            let vh = c.v.columns(h * dh, dh);
            let doh = dconcat.columns(h * dh, dh);
            // dA = dO V^T ; dV = A^T dO
            let da = matmul_nt(&doh, &vh.data, vh.rows);
            let mut dvh = vec![0.0; vh.rows * dh];
            matmul_tn_acc(a, &doh, &mut dvh);
            let mut ds = Mat::zeros(a.rows, a.cols);
            for i in 0..a.rows {
                let (arow, darow) = (a.row(i), da.row(i));
                let inner: f64 = arow.iter().zip(darow).map(|(x, y)| x * y).sum();
                for (j, o) in ds.row_mut(i).iter_mut().enumerate() {
                    *o = arow[j] * (darow[j] - inner) * scale;
                }
            }
            let dqh = matmul(&ds, &kh.data, dh);
            let mut dkh = vec![0.0; kh.rows * dh];
            matmul_tn_acc(&ds, &qh, &mut dkh);
            dq.set_columns(h * dh, &dqh);
            dk.set_columns(h * dh, &Mat::from_vec(kh.rows, dh, dkh));
            dv.set_columns(h * dh, &Mat::from_vec(vh.rows, dh, dvh));
        }
        let dxq = self.q.backward(p, g, &c.xq, &dq);
        let mut dxkv = self.k.backward(p, g, &c.xkv, &dk);
        dxkv.add_assign(&self.v.backward(p, g, &c.xkv, &dv));
        (dxq, dxkv)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FeedForward {
    pub inner: Linear,
    pub outer: Linear,
}

pub struct FeedForwardCache {
    x: Mat,
    pre: Mat,
    act: Mat,
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2 / pi)

pub fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + 0.044715 * x * x * x)).tanh())
}

pub fn gelu_grad(x: f64) -> f64 {
    let u = GELU_C * (x + 0.044715 * x * x * x);
    let t = u.tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * 0.044715 * x * x)
}

impl FeedForward {
    pub fn new(layout: &mut ParamLayout, name: &str, d_model: usize, hidden: usize) -> Self {
        FeedForward {
            inner: Linear::new(layout, &format!("{name}.inner"), d_model, hidden),
            outer: Linear::new(layout, &format!("{name}.outer"), hidden, d_model),
        }
    }

    pub fn forward(&self, p: &[f64], x: &Mat) -> (Mat, FeedForwardCache) {
        let pre = self.inner.apply(p, x);
        let act = Mat::from_vec(pre.rows, pre.cols, pre.data.iter().map(|&v| gelu(v)).collect());
        let y = self.outer.apply(p, &act);
        (y, FeedForwardCache { x: x.clone(), pre, act })
    }

    pub fn backward(&self, p: &[f64], g: &mut [f64], c: &FeedForwardCache, dy: &Mat) -> Mat {
        let mut dact = self.outer.backward(p, g, &c.act, dy);
        for (d, &x) in dact.data.iter_mut().zip(&c.pre.data) {
            *d *= gelu_grad(x);
        }
        self.inner.backward(p, g, &c.x, &dact)
    }
}

/// Inverted dropout mask source; pass `None` to disable dropout.
pub struct Dropout<'a> {
    pub rate: f64,
    pub rng: &'a mut ChaCha8Rng,
}

/// Applies dropout in place, returning the mask (already scaled) or `None`.
pub fn dropout(x: &mut Mat, drop: &mut Option<Dropout<'_>>) -> Option<Vec<f64>> {
    let d = drop.as_mut()?;
    if d.rate <= 0.0 {
        return None;
    }
    let keep = 1.0 - d.rate;
    let mask: Vec<f64> = (0..x.data.len())
        .map(|_| if d.rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 })
        .collect();
    for (v, m) in x.data.iter_mut().zip(&mask) {
        *v *= m;
    }
    Some(mask)
}

pub fn dropout_backward(dy: &Mat, mask: &Option<Vec<f64>>) -> Mat {
    match mask {
        None => dy.clone(),
        Some(m) => Mat::from_vec(dy.rows, dy.cols, dy.data.iter().zip(m).map(|(a, b)| a * b).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn mat(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
        Mat::from_vec(
            rows,
            cols,
            (0..rows * cols).map(|_| rng.random::<f64>() - 0.5).collect(),
        )
    }

    /// Directional finite-difference check of an input gradient.
    fn check_input_grad(f: impl Fn(&Mat) -> f64, x: &Mat, dx: &Mat) {
        let eps = 1e-6;
        for i in 0..x.data.len() {
            let mut xp = x.clone();
            xp.data[i] += eps;
            let mut xm = x.clone();
            xm.data[i] -= eps;
            let num = (f(&xp) - f(&xm)) / (2.0 * eps);
            assert!((num - dx.data[i]).abs() < 1e-7, "index {i}: {num} vs {}", dx.data[i]);
        }
    }

    // loss = sum(y * w) for a fixed random w
    fn weighted_sum(y: &Mat, w: &Mat) -> f64 {
        y.data.iter().zip(&w.data).map(|(a, b)| a * b).sum()
    }

    #[test]
    fn layernorm_input_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut layout = ParamLayout::default();
        let ln = LayerNorm::new(&mut layout, "ln", 5);
        let mut p = layout.initialize(&mut rng);
        p.iter_mut().for_each(|v| *v += rng.random::<f64>() * 0.3);
        let x = mat(3, 5, &mut rng);
        let w = mat(3, 5, &mut rng);
        let (_, cache) = ln.forward(&p, &x);
        let mut g = vec![0.0; layout.size];
        let dx = ln.backward(&p, &mut g, &cache, &w);
        check_input_grad(|x| weighted_sum(&ln.apply(&p, x), &w), &x, &dx);
    }

    #[test]
    fn attention_input_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut layout = ParamLayout::default();
        let att = Attention::new(&mut layout, "att", 4, 2);
        let p = layout.initialize(&mut rng);
        let xq = mat(3, 4, &mut rng);
        let xkv = mat(5, 4, &mut rng);
        let w = mat(3, 4, &mut rng);
        let (_, cache) = att.forward(&p, &xq, &xkv, false);
        for a in &cache.weights {
            for r in 0..a.rows {
                assert!((a.row(r).iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
        let mut g = vec![0.0; layout.size];
        let (dxq, dxkv) = att.backward(&p, &mut g, &cache, &w);
        check_input_grad(|x| weighted_sum(&att.forward(&p, x, &xkv, false).0, &w), &xq, &dxq);
        check_input_grad(|x| weighted_sum(&att.forward(&p, &xq, x, false).0, &w), &xkv, &dxkv);
    }

    #[test]
    fn causal_self_attention_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut layout = ParamLayout::default();
        let att = Attention::new(&mut layout, "att", 4, 1);
        let p = layout.initialize(&mut rng);
        let x = mat(4, 4, &mut rng);
        let w = mat(4, 4, &mut rng);
        let (_, cache) = att.forward(&p, &x, &x, true);
        assert_eq!(cache.weights[0].get(0, 1), 0.0);
        let mut g = vec![0.0; layout.size];
        let (dq, dkv) = att.backward(&p, &mut g, &cache, &w);
        let mut dx = dq;
        dx.add_assign(&dkv);
        check_input_grad(|x| weighted_sum(&att.forward(&p, x, x, true).0, &w), &x, &dx);
    }

    #[test]
    fn feed_forward_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut layout = ParamLayout::default();
        let ff = FeedForward::new(&mut layout, "ff", 3, 7);
        let p = layout.initialize(&mut rng);
        let x = mat(2, 3, &mut rng);
        let w = mat(2, 3, &mut rng);
        let (_, cache) = ff.forward(&p, &x);
        let mut g = vec![0.0; layout.size];
        let dx = ff.backward(&p, &mut g, &cache, &w);
        check_input_grad(|x| weighted_sum(&ff.forward(&p, x).0, &w), &x, &dx);
        let h = 1e-6;
        assert!((gelu_grad(0.7) - (gelu(0.7 + h) - gelu(0.7 - h)) / (2.0 * h)).abs() < 1e-8);
    }
}

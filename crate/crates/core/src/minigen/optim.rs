use rayon::prelude::*;

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(size: usize, lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; size],
            v: vec![0.0; size],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        if self.lr == 0.0 {
            return;
        }
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mhat = self.m[i] / bc1;
            let vhat = self.v[i] / bc2;
            params[i] -= self.lr * mhat / (vhat.sqrt() + self.eps);
        }
    }
}

/// Rescales `grad` so its L2 norm is at most `max_norm`; returns the
/// original norm.
pub fn clip_grad_norm(grad: &mut [f64], max_norm: f64) -> f64 {
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm && norm > 0.0 {
        let s = max_norm / norm;
        grad.iter_mut().for_each(|g| *g *= s);
    }
    norm
}

const ACCUMULATION_CHUNKS: usize = 16;

/// Runs `f` over `items` in parallel and sums the weighted gradients.
/// Items are split into a fixed number of contiguous chunks that are summed
/// sequentially and then combined in chunk order, so the result does not
/// depend on thread scheduling. Returns the per-item losses and the sum.
pub fn accumulate<T, F, E>(items: &[T], size: usize, f: F) -> Result<(Vec<f64>, Vec<f64>), E>
where
    T: Sync,
    E: Send,
    F: Fn(usize, &T) -> Result<(f64, f64, Vec<f64>), E> + Sync,
{
    if items.is_empty() {
        return Ok((Vec::new(), vec![0.0; size]));
    }
    let chunk = items.len().div_ceil(ACCUMULATION_CHUNKS);
    let partials: Vec<(Vec<f64>, Vec<f64>)> = items
        .par_chunks(chunk)
        .enumerate()
        .map(|(c, part)| {
            let mut acc = vec![0.0; size];
            let mut losses = Vec::with_capacity(part.len());
            for (j, it) in part.iter().enumerate() {
                let (loss, weight, g) = f(c * chunk + j, it)?;
                losses.push(loss);
                for (a, v) in acc.iter_mut().zip(&g) {
                    *a += weight * v;
                }
            }
            Ok((losses, acc))
        })
        .collect::<Result<_, E>>()?;
    let mut total = vec![0.0; size];
    let mut losses = Vec::with_capacity(items.len());
    for (l, acc) in partials {
        losses.extend(l);
        for (t, v) in total.iter_mut().zip(&acc) {
            *t += v;
        }
    }
    Ok((losses, total))
}

use rand::Rng;
use rand_distr::{Distribution, Normal};

/// A named block inside a flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tensor {
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Tensor {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }

    pub fn view<'a>(&self, data: &'a [f64]) -> &'a [f64] {
        &data[self.range()]
    }

    pub fn view_mut<'a>(&self, data: &'a mut [f64]) -> &'a mut [f64] {
        &mut data[self.range()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    Zeros,
    Ones,
    Normal(f64),
}

#[derive(Debug, Clone)]
pub struct LayoutEntry {
    pub name: String,
    pub tensor: Tensor,
    pub init: Init,
}

/// Offsets of every tensor of a model inside one flat `Vec<f64>`.
#[derive(Debug, Clone, Default)]
pub struct ParamLayout {
    pub entries: Vec<LayoutEntry>,
    pub size: usize,
}

impl ParamLayout {
    pub fn tensor(&mut self, name: impl Into<String>, rows: usize, cols: usize, init: Init) -> Tensor {
        let t = Tensor {
            offset: self.size,
            rows,
            cols,
        };
        self.size += t.len();
        self.entries.push(LayoutEntry {
            name: name.into(),
            tensor: t,
            init,
        });
        t
    }

    pub fn initialize<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut data = vec![0.0; self.size];
        for e in &self.entries {
            let view = e.tensor.view_mut(&mut data);
            match e.init {
                Init::Zeros => {}
                Init::Ones => view.fill(1.0),
                Init::Normal(std) => {
                    let dist = Normal::new(0.0, std).expect("finite std");
                    view.iter_mut().for_each(|x| *x = dist.sample(rng));
                }
            }
        }
        data
    }

    /// Name of the tensor holding flat index `i`.
    pub fn locate(&self, i: usize) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.tensor.range().contains(&i))
            .map(|e| e.name.as_str())
    }
}

/// SHA-256 of the little-endian bytes of `data`, hex encoded.
pub fn checksum(data: &[f64]) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for x in data {
        h.update(x.to_le_bytes());
    }
    hex::encode(h.finalize())
}

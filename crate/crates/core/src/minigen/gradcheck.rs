use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{GeneratorParams, Seq2SeqExample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// Full f64 loss evaluations.
    Double,
    /// Loss values rounded to f32 before differencing.
    Single,
}

impl std::str::FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "double" | "f64" => Ok(Precision::Double),
            "single" | "f32" => Ok(Precision::Single),
            other => Err(Error::InvalidArgument(format!(
                "unknown precision `{other}` (double|single)"
            ))),
        }
    }
}

/// Gradients below this magnitude on both sides count as zero; relative
/// error is measured against `max(|analytic|, |numeric|, ABS_FLOOR)`.
pub const ABS_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_relative_error: f64,
    pub worst_index: usize,
    pub worst_tensor: String,
    pub analytic: f64,
    pub numeric: f64,
    pub precision: Precision,
}

impl GradCheckReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.max_relative_error < tolerance
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(ABS_FLOOR)
}

/// Compares the backward pass against central differences
/// `(L(p + eps) - L(p - eps)) / 2eps` on `samples` randomly chosen
/// parameters (all of them if the model is smaller).
pub fn gradient_check(
    params: &GeneratorParams,
    example: &Seq2SeqExample,
    epsilon: f64,
    samples: usize,
    seed: u64,
    precision: Precision,
) -> Result<GradCheckReport> {
    if epsilon <= 0.0 {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let (_, grad) = params.loss_and_grad(example, &mut None)?;
    let n = params.num_params();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = sample(&mut rng, n, samples.min(n)).into_vec();

    let mut probe = params.clone();
    let eval = |p: &GeneratorParams| -> Result<f64> {
        let l = p.loss(example)?;
        Ok(match precision {
            Precision::Double => l,
            Precision::Single => l as f32 as f64,
        })
    };
    let mut report = GradCheckReport {
        checked: indices.len(),
        max_relative_error: 0.0,
        worst_index: 0,
        worst_tensor: String::new(),
        analytic: 0.0,
        numeric: 0.0,
        precision,
    };
    for &i in &indices {
        let orig = probe.data[i];
        probe.data[i] = orig + epsilon;
        let plus = eval(&probe)?;
        probe.data[i] = orig - epsilon;
        let minus = eval(&probe)?;
        probe.data[i] = orig;
        let numeric = (plus - minus) / (2.0 * epsilon);
        let err = relative_error(grad[i], numeric);
        if err > report.max_relative_error || report.worst_tensor.is_empty() {
            report.max_relative_error = err;
            report.worst_index = i;
            report.analytic = grad[i];
            report.numeric = numeric;
            report.worst_tensor = params.layout.params.locate(i).unwrap_or("?").to_string();
        }
    }
    Ok(report)
}

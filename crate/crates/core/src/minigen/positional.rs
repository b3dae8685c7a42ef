use super::tensor::Mat;

/// Fixed sinusoidal position signal: `sin(t / 10000^(2i/d))` in even
/// columns, `cos` of the same angle in odd columns.
pub fn positional_signal(length: usize, d_model: usize) -> Mat {
    let mut m = Mat::zeros(length, d_model);
    for t in 0..length {
        let row = m.row_mut(t);
        for (c, v) in row.iter_mut().enumerate() {
            let pair = (c / 2) as f64;
            let angle = t as f64 / 10000f64.powf(2.0 * pair / d_model as f64);
            *v = if c % 2 == 0 { angle.sin() } else { angle.cos() };
        }
    }
    m
}

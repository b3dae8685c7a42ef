//! A small encoder-decoder transformer written from scratch.
//!
//! Pre-norm residual blocks, sinusoidal positions, causal decoder
//! self-attention plus cross-attention over the encoder output, and a token
//! embedding shared with the output projection. All arithmetic is f64 and
//! every backward pass is hand-written, so gradients can be checked against
//! finite differences.

mod decode;
mod gradcheck;
pub mod layers;
mod model;
mod optim;
pub mod params;
mod positional;
pub mod stack;
pub mod tensor;
mod train;

pub use decode::{generate, generate_detailed, DecodeConfig, Generation, IncrementalDecoder, Strategy};
pub use gradcheck::{gradient_check, relative_error, GradCheckReport, Precision, ABS_FLOOR};
pub use model::{argmax, AttentionMaps, GeneratorConfig, GeneratorLayout, GeneratorParams, Seq2SeqExample};
pub use optim::{accumulate, clip_grad_norm, Adam};
pub use positional::positional_signal;
pub use tensor::Mat;
pub use train::{continue_training, train_generator, TrainConfig, TrainReport};

pub(crate) use train::example_rng;

//! Classify summative-assessment questions into the revised taxonomy's six
//! cognitive processes and three knowledge dimensions with two from-scratch
//! deep models: a 1-D convolutional classifier and an LSTM classifier.
//!
//! The crate is organized along the pipeline:
//!
//! - [`corpus`]: labeled question datasets — parsing (CSV/JSONL), validation,
//!   class distributions, a seeded synthetic generator, and stratified
//!   train/test splitting.
//! - [`textpipe`]: tokenization, frequency-ranked vocabulary with a size cap,
//!   integer sequences, pre-padding, and one-hot label encoding.
//! - [`nn`]: tensors plus forward and backward passes for every layer
//!   (embedding, spatial dropout, 1-D convolution with global max pooling,
//!   LSTM, dense softmax, cross-entropy), with a finite-difference gradient
//!   checker as an independent oracle.
//! - [`train`]: seeded mini-batch training (Adam or SGD), per-epoch metric
//!   capture, and prediction.
//! - [`evalreport`]: accuracy/loss/confusion evaluation, comparative result
//!   tables, and curve CSV export.
//! - [`persist`]: versioned text formats for models and training histories.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`). Training
//! runs in `f64` by default — the `*64` aliases below are the types the CLI
//! and tests use. Random streams are sampled in `f64` and converted, so a
//! given seed yields the same draw sequence for both scalar types.

mod error;
mod scalar;
mod tensor;

pub mod corpus;
pub mod evalreport;
pub mod nn;
pub mod persist;
pub mod textpipe;
pub mod train;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use tensor::Tensor;

/// Default-precision aliases. The numeric core is generic; these are the
/// concrete types used throughout the CLI and the acceptance suite.
pub type Tensor64 = Tensor<f64>;
pub type ModelParams64 = nn::ModelParams<f64>;
pub type CnnParams64 = nn::CnnParams<f64>;
pub type LstmParams64 = nn::LstmParams<f64>;
pub type Probabilities64 = nn::Probabilities<f64>;
pub type TrainedModel64 = train::TrainedModel<f64>;
pub type Prediction64 = train::Prediction<f64>;

/// Single-precision aliases for memory-constrained runs.
pub type Tensor32 = Tensor<f32>;
pub type ModelParams32 = nn::ModelParams<f32>;
pub type TrainedModel32 = train::TrainedModel<f32>;

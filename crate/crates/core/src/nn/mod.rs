//! The numeric core: forward and backward passes for every layer the two
//! architectures need, written directly against [`Tensor`].
//!
//! Forward and backward are pure given (params, input, rng state). Parameters
//! can be shared read-only across threads; training mutates one instance
//! exclusively.

mod cnn;
mod gradcheck;
mod layers;
mod lstm;
mod params;

pub use cnn::{conv1d_globalmax_forward, CnnDims, CnnParams};
pub use gradcheck::{check_model_gradients, GradCheckReport};
pub use layers::{
    cross_entropy, dense_softmax_forward, embedding_forward, softmax, softmax_ce_delta,
    spatial_dropout, LOSS_EPSILON,
};
pub use lstm::{lstm_forward, LstmDims, LstmParams};
pub use params::ModelParams;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Whether dropout layers are live (training) or identity (inference).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Output activation of the convolutional classifier head. Softmax is the
/// default; the per-class sigmoid variant is kept behind this switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    Softmax,
    Sigmoid,
}

impl fmt::Display for OutputActivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputActivation::Softmax => "softmax",
            OutputActivation::Sigmoid => "sigmoid",
        })
    }
}

impl FromStr for OutputActivation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "softmax" => Ok(OutputActivation::Softmax),
            "sigmoid" => Ok(OutputActivation::Sigmoid),
            other => Err(Error::invalid(format!(
                "unknown output activation {other:?} (expected softmax or sigmoid)"
            ))),
        }
    }
}

/// Runtime layer knobs that are not trainable parameters: dropout rates for
/// the recurrent stack and the convolutional head's output activation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerConfig {
    /// Channel dropout applied to the embedding output before the LSTM.
    pub spatial_dropout: f64,
    /// Variational dropout on the LSTM gate inputs (one mask per sequence).
    pub lstm_dropout: f64,
    /// Variational dropout on the LSTM recurrent connections.
    pub lstm_recurrent_dropout: f64,
    pub cnn_output: OutputActivation,
}

impl Default for LayerConfig {
    fn default() -> Self {
        LayerConfig {
            spatial_dropout: 0.0,
            lstm_dropout: 0.0,
            lstm_recurrent_dropout: 0.0,
            cnn_output: OutputActivation::Softmax,
        }
    }
}

impl LayerConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, rate) in [
            ("spatial_dropout", self.spatial_dropout),
            ("lstm_dropout", self.lstm_dropout),
            ("lstm_recurrent_dropout", self.lstm_recurrent_dropout),
        ] {
            if !(0.0..1.0).contains(&rate) {
                return Err(Error::invalid(format!(
                    "{name} must be in [0, 1), got {rate}"
                )));
            }
        }
        Ok(())
    }
}

/// A predicted class distribution. The softmax path sums to one; the sigmoid
/// compatibility path yields independent per-class scores in (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Probabilities<S> {
    values: Vec<S>,
}

impl<S: Scalar> Probabilities<S> {
    /// Wrap a normalized distribution; checked in debug/test builds.
    pub(crate) fn from_distribution(values: Vec<S>) -> Self {
        #[cfg(debug_assertions)]
        {
            let sum: f64 = values.iter().map(|v| v.as_f64()).sum();
            assert!(
                (sum - 1.0).abs() <= S::SUM_TOLERANCE,
                "distribution sums to {sum}, not 1"
            );
            assert!(values.iter().all(|v| v.is_finite()), "non-finite probability");
        }
        Probabilities { values }
    }

    /// Wrap unnormalized per-class scores (sigmoid head).
    pub(crate) fn from_scores(values: Vec<S>) -> Self {
        Probabilities { values }
    }

    pub fn as_slice(&self) -> &[S] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_vec(self) -> Vec<S> {
        self.values
    }
}

/// Run one architecture end to end over a padded index row.
pub fn model_forward<S: Scalar, R: Rng>(
    params: &ModelParams<S>,
    seq: &[usize],
    mode: Mode,
    layers: &LayerConfig,
    rng: &mut R,
) -> Result<Probabilities<S>> {
    match params {
        ModelParams::Cnn(p) => cnn::cnn_forward(p, seq, layers.cnn_output),
        ModelParams::Lstm(p) => lstm::lstm_model_forward(p, seq, mode, layers, rng),
    }
}

/// Inference-mode forward pass; deterministic, consumes no randomness.
pub fn model_forward_infer<S: Scalar>(
    params: &ModelParams<S>,
    seq: &[usize],
    layers: &LayerConfig,
) -> Result<Probabilities<S>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    model_forward(params, seq, Mode::Infer, layers, &mut rng)
}

/// Loss and the exact analytic gradient of `cross_entropy ∘ model_forward`
/// with respect to every parameter, sharing dropout masks with the internal
/// forward pass.
pub fn model_backward<S: Scalar, R: Rng>(
    params: &ModelParams<S>,
    seq: &[usize],
    truth: &[S],
    mode: Mode,
    layers: &LayerConfig,
    rng: &mut R,
) -> Result<(S, ModelParams<S>)> {
    match params {
        ModelParams::Cnn(p) => {
            let (loss, grads) = cnn::cnn_backward(p, seq, truth, layers.cnn_output)?;
            Ok((loss, ModelParams::Cnn(grads)))
        }
        ModelParams::Lstm(p) => {
            let (loss, grads) = lstm::lstm_model_backward(p, seq, truth, mode, layers, rng)?;
            Ok((loss, ModelParams::Lstm(grads)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Task;

    #[test]
    fn fresh_models_emit_valid_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let layers = LayerConfig::default();
        for params in [
            ModelParams::<f64>::init_cnn(
                &CnnDims {
                    vocab_rows: 11,
                    emb_dim: 8,
                    kernel_width: 3,
                    num_filters: 4,
                    classes: Task::Cognitive.class_count(),
                },
                &mut rng,
            ),
            ModelParams::<f64>::init_lstm(
                &LstmDims {
                    vocab_rows: 11,
                    emb_dim: 8,
                    units: 10,
                    classes: Task::Knowledge.class_count(),
                },
                &mut rng,
            ),
        ] {
            let seq = [0, 3, 1, 4, 2, 0, 5, 6];
            let probs = model_forward_infer(&params, &seq, &layers).unwrap();
            assert_eq!(probs.len(), params.classes());
            let sum: f64 = probs.as_slice().iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn infer_forward_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = ModelParams::<f64>::init_lstm(
            &LstmDims {
                vocab_rows: 9,
                emb_dim: 5,
                units: 4,
                classes: 3,
            },
            &mut rng,
        );
        let layers = LayerConfig {
            spatial_dropout: 0.5,
            lstm_dropout: 0.5,
            lstm_recurrent_dropout: 0.5,
            cnn_output: OutputActivation::Softmax,
        };
        let seq = [0, 0, 2, 5, 1, 8];
        let a = model_forward_infer(&params, &seq, &layers).unwrap();
        let b = model_forward_infer(&params, &seq, &layers).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn output_length_follows_task() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (classes, expected) in [(6usize, 6usize), (3, 3)] {
            let params = ModelParams::<f64>::init_cnn(
                &CnnDims {
                    vocab_rows: 7,
                    emb_dim: 4,
                    kernel_width: 2,
                    num_filters: 3,
                    classes,
                },
                &mut rng,
            );
            let probs =
                model_forward_infer(&params, &[1, 2, 3, 4], &LayerConfig::default()).unwrap();
            assert_eq!(probs.len(), expected);
        }
    }

    #[test]
    fn zero_output_layer_delta_when_probs_equal_truth() {
        let truth = [0.0, 1.0, 0.0];
        let delta = softmax_ce_delta(&truth, &truth);
        assert!(delta.iter().all(|&d| d == 0.0));
    }
}

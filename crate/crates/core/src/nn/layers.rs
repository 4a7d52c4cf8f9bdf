use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::{Mode, Probabilities};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Probabilities are clamped to this floor inside the log, keeping the loss
/// finite when a true class receives zero mass.
pub const LOSS_EPSILON: f64 = 1e-12;

/// Look up one embedding row per sequence position: output row `t` is
/// embedding row `seq[t]`. The pad index 0 participates like any other row,
/// so the pad embedding is trainable.
pub fn embedding_forward<S: Scalar>(embedding: &Tensor<S>, seq: &[usize]) -> Result<Tensor<S>> {
    let rows = embedding.shape()[0];
    let emb_dim = embedding.shape()[1];
    let mut out = Tensor::zeros(&[seq.len(), emb_dim]);
    for (t, &idx) in seq.iter().enumerate() {
        if idx >= rows {
            return Err(Error::invalid(format!(
                "token index {idx} out of range for embedding with {rows} rows"
            )));
        }
        out.row_mut(t).copy_from_slice(embedding.row(idx));
    }
    out.debug_assert_finite("embedding output");
    Ok(out)
}

/// Channel dropout over an embedded sequence: in train mode each embedding
/// channel is zeroed across all time steps with probability `rate`, and the
/// survivors are scaled by 1/(1-rate). Inference is the identity.
pub fn spatial_dropout<S: Scalar, R: Rng>(
    input: &Tensor<S>,
    rate: f64,
    mode: Mode,
    rng: &mut R,
) -> Result<Tensor<S>> {
    let (out, _mask) = spatial_dropout_masked(input, rate, mode, rng)?;
    Ok(out)
}

/// Dropout with the sampled per-channel scale mask returned for reuse in the
/// backward pass.
pub(crate) fn spatial_dropout_masked<S: Scalar, R: Rng>(
    input: &Tensor<S>,
    rate: f64,
    mode: Mode,
    rng: &mut R,
) -> Result<(Tensor<S>, Vec<S>)> {
    let channels = input.shape()[1];
    let mask = channel_mask(channels, rate, mode, rng)?;
    let mut out = input.clone();
    for t in 0..input.shape()[0] {
        let row = out.row_mut(t);
        for (value, scale) in row.iter_mut().zip(mask.iter()) {
            *value *= *scale;
        }
    }
    Ok((out, mask))
}

/// Inverted-dropout scale vector: 0 for dropped channels, 1/(1-rate) for
/// kept ones. All ones in inference mode or at rate 0.
pub(crate) fn channel_mask<S: Scalar, R: Rng>(
    channels: usize,
    rate: f64,
    mode: Mode,
    rng: &mut R,
) -> Result<Vec<S>> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::invalid(format!(
            "dropout rate must be in [0, 1), got {rate}"
        )));
    }
    if mode == Mode::Infer || rate == 0.0 {
        return Ok(vec![S::one(); channels]);
    }
    let keep_scale = S::from_f64(1.0 / (1.0 - rate));
    Ok((0..channels)
        .map(|_| {
            if rng.gen::<f64>() < rate {
                S::zero()
            } else {
                keep_scale
            }
        })
        .collect())
}

pub(crate) fn sigmoid<S: Scalar>(x: S) -> S {
    S::one() / (S::one() + (-x).exp())
}

pub(crate) fn dense_logits<S: Scalar>(
    weights: &Tensor<S>,
    bias: &Tensor<S>,
    features: &[S],
) -> Result<Vec<S>> {
    let (rows, classes) = (weights.shape()[0], weights.shape()[1]);
    if rows != features.len() || bias.len() != classes {
        return Err(Error::shape(format!(
            "dense layer: weights {:?}, bias {:?}, features {}",
            weights.shape(),
            bias.shape(),
            features.len()
        )));
    }
    let mut logits: Vec<S> = bias.data().to_vec();
    for (k, &f) in features.iter().enumerate() {
        let w_row = weights.row(k);
        for (logit, &w) in logits.iter_mut().zip(w_row.iter()) {
            *logit += f * w;
        }
    }
    Ok(logits)
}

/// Numerically stable softmax (max-subtracted); output sums to one.
pub fn softmax<S: Scalar>(logits: &[S]) -> Vec<S> {
    let max = logits
        .iter()
        .copied()
        .fold(S::neg_infinity(), |a, b| if b > a { b } else { a });
    let exps: Vec<S> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: S = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Linear layer followed by softmax: `logits = featuresᵀW + b`.
pub fn dense_softmax_forward<S: Scalar>(
    weights: &Tensor<S>,
    bias: &Tensor<S>,
    features: &[S],
) -> Result<Probabilities<S>> {
    let logits = dense_logits(weights, bias, features)?;
    Ok(Probabilities::from_distribution(softmax(&logits)))
}

/// Per-class sigmoid head (compatibility switch for the convolutional
/// classifier); scores are not normalized.
pub(crate) fn dense_sigmoid_forward<S: Scalar>(
    weights: &Tensor<S>,
    bias: &Tensor<S>,
    features: &[S],
) -> Result<Probabilities<S>> {
    let logits = dense_logits(weights, bias, features)?;
    Ok(Probabilities::from_scores(
        logits.into_iter().map(sigmoid).collect(),
    ))
}

/// Categorical cross-entropy `-Σᵢ tᵢ log(max(sᵢ, ε))` with ε = 1e-12.
pub fn cross_entropy<S: Scalar>(truth: &[S], probs: &[S]) -> Result<S> {
    if truth.len() != probs.len() {
        return Err(Error::shape(format!(
            "cross entropy: truth has {} entries, probabilities {}",
            truth.len(),
            probs.len()
        )));
    }
    let eps = S::from_f64(LOSS_EPSILON);
    let mut loss = S::zero();
    for (&t, &s) in truth.iter().zip(probs.iter()) {
        if t != S::zero() {
            loss -= t * s.max(eps).ln();
        }
    }
    Ok(loss)
}

/// Fused gradient of softmax + cross-entropy at the logits: `probs - truth`.
pub fn softmax_ce_delta<S: Scalar>(probs: &[S], truth: &[S]) -> Vec<S> {
    probs
        .iter()
        .zip(truth.iter())
        .map(|(&p, &t)| p - t)
        .collect()
}

/// Gradient of `-Σ tᵢ log σ(zᵢ)` at the logits for the sigmoid head:
/// `tᵢ (σ(zᵢ) - 1)`.
pub(crate) fn sigmoid_ce_delta<S: Scalar>(scores: &[S], truth: &[S]) -> Vec<S> {
    scores
        .iter()
        .zip(truth.iter())
        .map(|(&s, &t)| t * (s - S::one()))
        .collect()
}

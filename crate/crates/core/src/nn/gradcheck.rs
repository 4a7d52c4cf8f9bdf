//! Finite-difference gradient oracle.
//!
//! Checks the analytic gradients from [`model_backward`] against central
//! finite differences of the loss computed through [`model_forward_infer`]
//! only — the check never touches the backward code path it verifies.
//! Meaningful in `f64`; dropout is disabled (inference mode) so the loss is
//! a deterministic function of the parameters.

use crate::error::Result;
use crate::nn::layers::cross_entropy;
use crate::nn::{model_backward, model_forward_infer, LayerConfig, Mode, ModelParams};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Outcome of one full-parameter gradient check.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    /// Largest relative error across every parameter entry.
    pub max_rel_error: f64,
    /// `tensor[index]` where the worst error occurred.
    pub worst: String,
    /// Number of scalar parameters checked.
    pub checked: usize,
}

fn loss_at(
    params: &ModelParams<f64>,
    seq: &[usize],
    truth: &[f64],
    layers: &LayerConfig,
) -> Result<f64> {
    let probs = model_forward_infer(params, seq, layers)?;
    cross_entropy(truth, probs.as_slice())
}

/// Compare the analytic gradient of every parameter against the central
/// difference `(L(θ+h) - L(θ-h)) / 2h`.
///
/// Relative error is `|a - fd| / max(|a|, |fd|, 1e-6)`. The 1e-6 floor keeps
/// the check meaningful where the difference quotient bottoms out: central
/// differences of an O(1) loss carry ~1e-11 of roundoff at h = 1e-5, so for
/// microscopic gradients the comparison is against an absolute 1e-10 budget
/// instead of an unresolvable relative one.
pub fn check_model_gradients(
    params: &ModelParams<f64>,
    seq: &[usize],
    truth: &[f64],
    layers: &LayerConfig,
    h: f64,
) -> Result<GradCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(0); // unused in inference mode
    let (_, analytic) = model_backward(params, seq, truth, Mode::Infer, layers, &mut rng)?;

    let mut work = params.clone();
    let mut max_rel_error = 0.0f64;
    let mut worst = String::from("none");
    let mut checked = 0usize;

    let tensor_count = params.tensors().len();
    for tensor_idx in 0..tensor_count {
        let entries = params.tensors()[tensor_idx].1.len();
        for entry in 0..entries {
            let original = params.tensors()[tensor_idx].1.data()[entry];

            work.tensors_mut()[tensor_idx].1.data_mut()[entry] = original + h;
            let loss_plus = loss_at(&work, seq, truth, layers)?;
            work.tensors_mut()[tensor_idx].1.data_mut()[entry] = original - h;
            let loss_minus = loss_at(&work, seq, truth, layers)?;
            work.tensors_mut()[tensor_idx].1.data_mut()[entry] = original;

            let fd = (loss_plus - loss_minus) / (2.0 * h);
            let a = analytic.tensors()[tensor_idx].1.data()[entry];
            let scale = a.abs().max(fd.abs()).max(1e-6);
            let rel = (a - fd).abs() / scale;
            if rel > max_rel_error {
                max_rel_error = rel;
                let name = params.tensors()[tensor_idx].0;
                worst = format!("{name}[{entry}]");
            }
            checked += 1;
        }
    }

    Ok(GradCheckReport {
        max_rel_error,
        worst,
        checked,
    })
}

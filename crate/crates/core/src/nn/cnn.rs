use crate::error::{Error, Result};
use crate::nn::layers::{
    cross_entropy, dense_logits, dense_sigmoid_forward, dense_softmax_forward, embedding_forward,
    sigmoid_ce_delta, softmax, softmax_ce_delta,
};
use crate::nn::{OutputActivation, Probabilities};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Shape bundle for the convolutional classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CnnDims {
    pub vocab_rows: usize,
    pub emb_dim: usize,
    pub kernel_width: usize,
    pub num_filters: usize,
    pub classes: usize,
}

/// Trainable weights of the convolutional stack:
/// embedding → valid 1-D convolution + ReLU → global max pool → dense head.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnParams<S> {
    /// [vocab_rows × emb_dim]; row 0 is the pad embedding.
    pub embedding: Tensor<S>,
    /// [num_filters × kernel_width × emb_dim].
    pub kernels: Tensor<S>,
    /// [num_filters].
    pub conv_bias: Tensor<S>,
    /// [num_filters × classes].
    pub out_w: Tensor<S>,
    /// [classes].
    pub out_b: Tensor<S>,
}

impl<S: Scalar> CnnParams<S> {
    pub fn zeros(dims: &CnnDims) -> Self {
        CnnParams {
            embedding: Tensor::zeros(&[dims.vocab_rows, dims.emb_dim]),
            kernels: Tensor::zeros(&[dims.num_filters, dims.kernel_width, dims.emb_dim]),
            conv_bias: Tensor::zeros(&[dims.num_filters]),
            out_w: Tensor::zeros(&[dims.num_filters, dims.classes]),
            out_b: Tensor::zeros(&[dims.classes]),
        }
    }

    pub fn dims(&self) -> CnnDims {
        CnnDims {
            vocab_rows: self.embedding.shape()[0],
            emb_dim: self.embedding.shape()[1],
            kernel_width: self.kernels.shape()[1],
            num_filters: self.kernels.shape()[0],
            classes: self.out_b.len(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(&self.dims())
    }

    pub fn classes(&self) -> usize {
        self.out_b.len()
    }

    pub(crate) fn tensors(&self) -> Vec<(&'static str, &Tensor<S>)> {
        vec![
            ("embedding", &self.embedding),
            ("kernels", &self.kernels),
            ("conv_bias", &self.conv_bias),
            ("out_w", &self.out_w),
            ("out_b", &self.out_b),
        ]
    }

    pub(crate) fn tensors_mut(&mut self) -> Vec<(&'static str, &mut Tensor<S>)> {
        vec![
            ("embedding", &mut self.embedding),
            ("kernels", &mut self.kernels),
            ("conv_bias", &mut self.conv_bias),
            ("out_w", &mut self.out_w),
            ("out_b", &mut self.out_b),
        ]
    }
}

pub(crate) struct ConvPoolCache<S> {
    embedded: Tensor<S>,
    /// Pre-activation conv outputs, [num_filters × positions].
    preact: Tensor<S>,
    /// Winning time position per filter (lowest index on ties).
    argmax: Vec<usize>,
    features: Vec<S>,
}

/// Valid 1-D convolution across time with full-width channels, bias, ReLU,
/// then a global max over time per filter. Returns the pooled feature vector.
pub fn conv1d_globalmax_forward<S: Scalar>(
    params: &CnnParams<S>,
    embedded: &Tensor<S>,
) -> Result<Vec<S>> {
    conv_pool_with_cache(params, embedded.clone()).map(|c| c.features)
}

fn conv_pool_with_cache<S: Scalar>(
    params: &CnnParams<S>,
    embedded: Tensor<S>,
) -> Result<ConvPoolCache<S>> {
    let maxlen = embedded.shape()[0];
    let emb_dim = embedded.shape()[1];
    let dims = params.dims();
    if emb_dim != dims.emb_dim {
        return Err(Error::shape(format!(
            "conv expects embedding dim {}, got {emb_dim}",
            dims.emb_dim
        )));
    }
    if maxlen < dims.kernel_width {
        return Err(Error::shape(format!(
            "sequence length {maxlen} shorter than kernel width {}",
            dims.kernel_width
        )));
    }
    let positions = maxlen - dims.kernel_width + 1;
    let mut preact = Tensor::zeros(&[dims.num_filters, positions]);
    let mut argmax = vec![0usize; dims.num_filters];
    let mut features = vec![S::zero(); dims.num_filters];

    for k in 0..dims.num_filters {
        let kernel = params.kernels.row(k); // [kernel_width * emb_dim], row-major
        let bias = params.conv_bias.data()[k];
        let mut best = S::zero();
        let mut best_pos = 0usize;
        for p in 0..positions {
            let mut z = bias;
            for w in 0..dims.kernel_width {
                let krow = &kernel[w * emb_dim..(w + 1) * emb_dim];
                let xrow = embedded.row(p + w);
                for (kv, xv) in krow.iter().zip(xrow.iter()) {
                    z += *kv * *xv;
                }
            }
            preact.set2(k, p, z);
            let activated = if z > S::zero() { z } else { S::zero() };
            if activated > best {
                best = activated;
                best_pos = p;
            }
        }
        features[k] = best;
        argmax[k] = best_pos;
    }

    Ok(ConvPoolCache {
        embedded,
        preact,
        argmax,
        features,
    })
}

pub(crate) fn cnn_forward<S: Scalar>(
    params: &CnnParams<S>,
    seq: &[usize],
    output: OutputActivation,
) -> Result<Probabilities<S>> {
    let embedded = embedding_forward(&params.embedding, seq)?;
    let cache = conv_pool_with_cache(params, embedded)?;
    let probs = match output {
        OutputActivation::Softmax => {
            dense_softmax_forward(&params.out_w, &params.out_b, &cache.features)?
        }
        OutputActivation::Sigmoid => {
            dense_sigmoid_forward(&params.out_w, &params.out_b, &cache.features)?
        }
    };
    Ok(probs)
}

/// Forward plus exact backward through the pooled path: only each filter's
/// winning window carries gradient, gated by its ReLU pre-activation.
pub(crate) fn cnn_backward<S: Scalar>(
    params: &CnnParams<S>,
    seq: &[usize],
    truth: &[S],
    output: OutputActivation,
) -> Result<(S, CnnParams<S>)> {
    let dims = params.dims();
    if truth.len() != dims.classes {
        return Err(Error::shape(format!(
            "truth vector has {} entries, model has {} classes",
            truth.len(),
            dims.classes
        )));
    }
    let embedded = embedding_forward(&params.embedding, seq)?;
    let cache = conv_pool_with_cache(params, embedded)?;

    let logits = dense_logits(&params.out_w, &params.out_b, &cache.features)?;
    let (probs, delta): (Vec<S>, Vec<S>) = match output {
        OutputActivation::Softmax => {
            let probs = softmax(&logits);
            let delta = softmax_ce_delta(&probs, truth);
            (probs, delta)
        }
        OutputActivation::Sigmoid => {
            let scores: Vec<S> = logits.iter().map(|&z| super::layers::sigmoid(z)).collect();
            let delta = sigmoid_ce_delta(&scores, truth);
            (scores, delta)
        }
    };
    let loss = cross_entropy(truth, &probs)?;

    let mut grads = params.zeros_like();

    // Dense head.
    grads.out_b.data_mut().copy_from_slice(&delta);
    let mut d_features = vec![S::zero(); dims.num_filters];
    for k in 0..dims.num_filters {
        let w_row = params.out_w.row(k);
        let gw_row = grads.out_w.row_mut(k);
        let f = cache.features[k];
        let mut acc = S::zero();
        for (c, &d) in delta.iter().enumerate() {
            gw_row[c] = f * d;
            acc += w_row[c] * d;
        }
        d_features[k] = acc;
    }

    // Conv + pool: gradient flows only through each filter's argmax window.
    let emb_dim = dims.emb_dim;
    let mut d_embedded = Tensor::<S>::zeros(&[seq.len(), emb_dim]);
    for k in 0..dims.num_filters {
        let p = cache.argmax[k];
        if cache.preact.at2(k, p) <= S::zero() {
            continue; // pooled value was the ReLU floor; no gradient
        }
        let dz = d_features[k];
        grads.conv_bias.data_mut()[k] += dz;
        let kernel = params.kernels.row(k);
        let gkernel = grads.kernels.row_mut(k);
        for w in 0..dims.kernel_width {
            let xrow = cache.embedded.row(p + w);
            let dxrow = d_embedded.row_mut(p + w);
            let krow = &kernel[w * emb_dim..(w + 1) * emb_dim];
            let gkrow = &mut gkernel[w * emb_dim..(w + 1) * emb_dim];
            for e in 0..emb_dim {
                gkrow[e] += dz * xrow[e];
                dxrow[e] += dz * krow[e];
            }
        }
    }

    // Scatter into embedding rows; repeated indices accumulate.
    for (t, &idx) in seq.iter().enumerate() {
        let src = d_embedded.row(t);
        let dst = grads.embedding.row_mut(idx);
        for (d, s) in dst.iter_mut().zip(src.iter()) {
            *d += *s;
        }
    }

    grads.kernels.debug_assert_finite("cnn kernel gradient");
    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_kernels_give_zero_features() {
        let dims = CnnDims {
            vocab_rows: 5,
            emb_dim: 4,
            kernel_width: 3,
            num_filters: 2,
            classes: 3,
        };
        let params = CnnParams::<f64>::zeros(&dims);
        let embedded = embedding_forward(&params.embedding, &[1, 2, 3, 4]).unwrap();
        let features = conv1d_globalmax_forward(&params, &embedded).unwrap();
        assert_eq!(features, vec![0.0, 0.0]);
    }

    #[test]
    fn width_one_channel_selector_takes_time_max() {
        let dims = CnnDims {
            vocab_rows: 1,
            emb_dim: 3,
            kernel_width: 1,
            num_filters: 1,
            classes: 3,
        };
        let mut params = CnnParams::<f64>::zeros(&dims);
        params.kernels.data_mut()[0] = 1.0; // selects channel 0
        let embedded = Tensor::from_vec(
            &[4, 3],
            vec![0.2, 9.0, 9.0, 0.7, 9.0, 9.0, 0.3, 9.0, 9.0, 0.1, 9.0, 9.0],
        )
        .unwrap();
        let features = conv1d_globalmax_forward(&params, &embedded).unwrap();
        assert_eq!(features, vec![0.7]);
    }

    #[test]
    fn sequence_shorter_than_kernel_is_rejected() {
        let dims = CnnDims {
            vocab_rows: 5,
            emb_dim: 2,
            kernel_width: 4,
            num_filters: 1,
            classes: 3,
        };
        let params = CnnParams::<f64>::zeros(&dims);
        let embedded = embedding_forward(&params.embedding, &[1, 2, 3]).unwrap();
        assert!(conv1d_globalmax_forward(&params, &embedded).is_err());
    }
}

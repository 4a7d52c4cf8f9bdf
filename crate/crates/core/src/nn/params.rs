use rand::Rng;

use crate::nn::cnn::{CnnDims, CnnParams};
use crate::nn::lstm::{LstmDims, LstmParams};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// All trainable weights for one architecture and one label task. Gradients
/// reuse the same container: a gradient set is shape-congruent with its
/// parameter set by construction.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams<S> {
    Cnn(CnnParams<S>),
    Lstm(LstmParams<S>),
}

fn uniform<S: Scalar, R: Rng>(rng: &mut R, low: f64, high: f64) -> S {
    // Sampling in f64 keeps the random stream identical across scalar types.
    S::from_f64(rng.gen_range(low..high))
}

fn fill_uniform<S: Scalar, R: Rng>(tensor: &mut Tensor<S>, rng: &mut R, low: f64, high: f64) {
    for v in tensor.data_mut() {
        *v = uniform(rng, low, high);
    }
}

fn fill_glorot<S: Scalar, R: Rng>(tensor: &mut Tensor<S>, rng: &mut R, fan_in: usize, fan_out: usize) {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    fill_uniform(tensor, rng, -limit, limit);
}

impl<S: Scalar> ModelParams<S> {
    /// Seeded init for the convolutional stack: uniform(-0.05, 0.05)
    /// embeddings, Glorot-uniform weights, zero biases.
    pub fn init_cnn<R: Rng>(dims: &CnnDims, rng: &mut R) -> Self {
        let mut p = CnnParams::zeros(dims);
        fill_uniform(&mut p.embedding, rng, -0.05, 0.05);
        fill_glorot(
            &mut p.kernels,
            rng,
            dims.kernel_width * dims.emb_dim,
            dims.kernel_width * dims.num_filters,
        );
        fill_glorot(&mut p.out_w, rng, dims.num_filters, dims.classes);
        ModelParams::Cnn(p)
    }

    /// Seeded init for the recurrent stack. The forget-gate bias starts at 1
    /// to stabilize early training; all other biases start at zero.
    pub fn init_lstm<R: Rng>(dims: &LstmDims, rng: &mut R) -> Self {
        let mut p = LstmParams::zeros(dims);
        fill_uniform(&mut p.embedding, rng, -0.05, 0.05);
        for k in 0..4 {
            fill_glorot(&mut p.w[k], rng, dims.emb_dim, dims.units);
        }
        for k in 0..4 {
            fill_glorot(&mut p.u[k], rng, dims.units, dims.units);
        }
        for v in p.b[1].data_mut() {
            *v = S::one(); // forget gate
        }
        fill_glorot(&mut p.out_w, rng, dims.units, dims.classes);
        ModelParams::Lstm(p)
    }

    pub fn zeros_like(&self) -> Self {
        match self {
            ModelParams::Cnn(p) => ModelParams::Cnn(p.zeros_like()),
            ModelParams::Lstm(p) => ModelParams::Lstm(p.zeros_like()),
        }
    }

    pub fn classes(&self) -> usize {
        match self {
            ModelParams::Cnn(p) => p.classes(),
            ModelParams::Lstm(p) => p.classes(),
        }
    }

    pub fn arch_name(&self) -> &'static str {
        match self {
            ModelParams::Cnn(_) => "cnn",
            ModelParams::Lstm(_) => "lstm",
        }
    }

    /// Named parameter tensors in a stable order (used by the optimizer,
    /// persistence, and the gradient checker).
    pub fn tensors(&self) -> Vec<(&'static str, &Tensor<S>)> {
        match self {
            ModelParams::Cnn(p) => p.tensors(),
            ModelParams::Lstm(p) => p.tensors(),
        }
    }

    pub fn tensors_mut(&mut self) -> Vec<(&'static str, &mut Tensor<S>)> {
        match self {
            ModelParams::Cnn(p) => p.tensors_mut(),
            ModelParams::Lstm(p) => p.tensors_mut(),
        }
    }

    /// Total number of scalar parameters.
    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    /// Element-wise `self += other`, used to accumulate per-sample gradients
    /// into a batch gradient.
    pub fn add_assign(&mut self, other: &ModelParams<S>) {
        let mut mine = self.tensors_mut();
        let theirs = other.tensors();
        debug_assert_eq!(mine.len(), theirs.len());
        for ((_, a), (_, b)) in mine.iter_mut().zip(theirs.iter()) {
            a.add_assign(b);
        }
    }

    pub fn scale(&mut self, factor: S) {
        for (_, t) in self.tensors_mut() {
            t.scale(factor);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn init_is_deterministic_per_seed() {
        let dims = LstmDims {
            vocab_rows: 12,
            emb_dim: 6,
            units: 4,
            classes: 3,
        };
        let a = ModelParams::<f64>::init_lstm(&dims, &mut ChaCha8Rng::seed_from_u64(42));
        let b = ModelParams::<f64>::init_lstm(&dims, &mut ChaCha8Rng::seed_from_u64(42));
        let c = ModelParams::<f64>::init_lstm(&dims, &mut ChaCha8Rng::seed_from_u64(43));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn lstm_shapes_follow_dims() {
        let dims = LstmDims {
            vocab_rows: 20,
            emb_dim: 7,
            units: 10,
            classes: 3,
        };
        let params = ModelParams::<f64>::init_lstm(&dims, &mut ChaCha8Rng::seed_from_u64(1));
        let ModelParams::Lstm(p) = &params else {
            unreachable!()
        };
        assert_eq!(p.out_w.shape(), &[10, 3]);
        assert_eq!(p.out_b.len(), 3);
        assert_eq!(p.w[0].shape(), &[10, 7]);
        assert_eq!(p.u[3].shape(), &[10, 10]);
        // Forget-gate bias starts at one, the others at zero.
        assert!(p.b[1].data().iter().all(|&v| v == 1.0));
        assert!(p.b[0].data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cnn_output_bias_length_matches_classes() {
        let dims = CnnDims {
            vocab_rows: 10,
            emb_dim: 5,
            kernel_width: 3,
            num_filters: 8,
            classes: 6,
        };
        let params = ModelParams::<f64>::init_cnn(&dims, &mut ChaCha8Rng::seed_from_u64(2));
        let ModelParams::Cnn(p) = &params else {
            unreachable!()
        };
        assert_eq!(p.out_b.len(), 6);
        assert_eq!(p.kernels.shape(), &[8, 3, 5]);
        assert!(p.out_b.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn f32_init_mirrors_f64_stream() {
        let dims = CnnDims {
            vocab_rows: 6,
            emb_dim: 4,
            kernel_width: 2,
            num_filters: 3,
            classes: 3,
        };
        let a = ModelParams::<f64>::init_cnn(&dims, &mut ChaCha8Rng::seed_from_u64(9));
        let b = ModelParams::<f32>::init_cnn(&dims, &mut ChaCha8Rng::seed_from_u64(9));
        let (_, a0) = a.tensors()[0];
        let (_, b0) = b.tensors()[0];
        for (x, y) in a0.data().iter().zip(b0.data().iter()) {
            assert_eq!(*y, *x as f32);
        }
    }
}

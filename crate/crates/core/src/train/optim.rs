use crate::error::{Error, Result};
use crate::nn::ModelParams;
use crate::scalar::Scalar;
use crate::tensor::Tensor;
use crate::train::config::{OptimizerKind, TrainingConfig};

/// Optimizer state: step counter plus first/second moment buffers for Adam
/// (empty for plain SGD).
#[derive(Debug, Clone)]
pub struct OptimizerState<S> {
    kind: OptimizerKind,
    learning_rate: S,
    beta1: S,
    beta2: S,
    epsilon: S,
    step: u64,
    m: Vec<Tensor<S>>,
    v: Vec<Tensor<S>>,
}

impl<S: Scalar> OptimizerState<S> {
    pub fn new(config: &TrainingConfig, params: &ModelParams<S>) -> Self {
        let (m, v) = match config.optimizer {
            OptimizerKind::Sgd => (Vec::new(), Vec::new()),
            OptimizerKind::Adam => {
                let zeros: Vec<Tensor<S>> = params
                    .tensors()
                    .iter()
                    .map(|(_, t)| Tensor::zeros(t.shape()))
                    .collect();
                (zeros.clone(), zeros)
            }
        };
        OptimizerState {
            kind: config.optimizer,
            learning_rate: S::from_f64(config.learning_rate),
            beta1: S::from_f64(config.beta1),
            beta2: S::from_f64(config.beta2),
            epsilon: S::from_f64(config.epsilon),
            step: 0,
            m,
            v,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// Apply one update: plain `p -= lr * g` for SGD, the bias-corrected
/// first/second-moment rule for Adam. Non-finite gradients abort with a
/// diagnostic naming the tensor.
pub fn optimizer_step<S: Scalar>(
    params: &mut ModelParams<S>,
    grads: &ModelParams<S>,
    state: &mut OptimizerState<S>,
) -> Result<()> {
    for (name, g) in grads.tensors() {
        if !g.is_finite() {
            return Err(Error::NonFinite(format!("gradient tensor {name}")));
        }
    }

    state.step += 1;
    let mut param_tensors = params.tensors_mut();
    let grad_tensors = grads.tensors();
    if param_tensors.len() != grad_tensors.len() {
        return Err(Error::shape("gradient/parameter tensor count mismatch"));
    }

    match state.kind {
        OptimizerKind::Sgd => {
            for ((name, p), (_, g)) in param_tensors.iter_mut().zip(grad_tensors.iter()) {
                if p.shape() != g.shape() {
                    return Err(Error::shape(format!("tensor {name} gradient shape differs")));
                }
                for (pv, gv) in p.data_mut().iter_mut().zip(g.data().iter()) {
                    *pv -= state.learning_rate * *gv;
                }
            }
        }
        OptimizerKind::Adam => {
            let one = S::one();
            let correction1 = one - state.beta1.powi(state.step as i32);
            let correction2 = one - state.beta2.powi(state.step as i32);
            for (idx, ((name, p), (_, g))) in param_tensors
                .iter_mut()
                .zip(grad_tensors.iter())
                .enumerate()
            {
                if p.shape() != g.shape() {
                    return Err(Error::shape(format!("tensor {name} gradient shape differs")));
                }
                let m = state.m[idx].data_mut();
                let v = state.v[idx].data_mut();
                for (((pv, gv), mv), vv) in p
                    .data_mut()
                    .iter_mut()
                    .zip(g.data().iter())
                    .zip(m.iter_mut())
                    .zip(v.iter_mut())
                {
                    *mv = state.beta1 * *mv + (one - state.beta1) * *gv;
                    *vv = state.beta2 * *vv + (one - state.beta2) * *gv * *gv;
                    let m_hat = *mv / correction1;
                    let v_hat = *vv / correction2;
                    *pv -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
                }
            }
        }
    }
    Ok(())
}

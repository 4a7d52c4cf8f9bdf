use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::layers::{
    channel_mask, cross_entropy, dense_logits, embedding_forward, sigmoid, softmax,
    softmax_ce_delta, spatial_dropout_masked,
};
use crate::nn::{LayerConfig, Mode, Probabilities};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

// Gate order throughout: input i, forget f, cell candidate g, output o.
const GATE_I: usize = 0;
const GATE_F: usize = 1;
const GATE_G: usize = 2;
const GATE_O: usize = 3;

/// Shape bundle for the recurrent classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LstmDims {
    pub vocab_rows: usize,
    pub emb_dim: usize,
    pub units: usize,
    pub classes: usize,
}

/// Trainable weights of the recurrent stack:
/// embedding → spatial dropout → LSTM → dense softmax head.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams<S> {
    /// [vocab_rows × emb_dim]; row 0 is the pad embedding.
    pub embedding: Tensor<S>,
    /// Input weights per gate (i, f, g, o), each [units × emb_dim].
    pub w: [Tensor<S>; 4],
    /// Recurrent weights per gate, each [units × units].
    pub u: [Tensor<S>; 4],
    /// Gate biases, each [units].
    pub b: [Tensor<S>; 4],
    /// [units × classes].
    pub out_w: Tensor<S>,
    /// [classes].
    pub out_b: Tensor<S>,
}

impl<S: Scalar> LstmParams<S> {
    pub fn zeros(dims: &LstmDims) -> Self {
        let gate_w = || Tensor::zeros(&[dims.units, dims.emb_dim]);
        let gate_u = || Tensor::zeros(&[dims.units, dims.units]);
        let gate_b = || Tensor::zeros(&[dims.units]);
        LstmParams {
            embedding: Tensor::zeros(&[dims.vocab_rows, dims.emb_dim]),
            w: [gate_w(), gate_w(), gate_w(), gate_w()],
            u: [gate_u(), gate_u(), gate_u(), gate_u()],
            b: [gate_b(), gate_b(), gate_b(), gate_b()],
            out_w: Tensor::zeros(&[dims.units, dims.classes]),
            out_b: Tensor::zeros(&[dims.classes]),
        }
    }

    pub fn dims(&self) -> LstmDims {
        LstmDims {
            vocab_rows: self.embedding.shape()[0],
            emb_dim: self.embedding.shape()[1],
            units: self.b[0].len(),
            classes: self.out_b.len(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(&self.dims())
    }

    pub fn classes(&self) -> usize {
        self.out_b.len()
    }

    pub fn units(&self) -> usize {
        self.b[0].len()
    }

    pub(crate) fn tensors(&self) -> Vec<(&'static str, &Tensor<S>)> {
        let mut out: Vec<(&'static str, &Tensor<S>)> = vec![("embedding", &self.embedding)];
        const W: [&str; 4] = ["w_i", "w_f", "w_g", "w_o"];
        const U: [&str; 4] = ["u_i", "u_f", "u_g", "u_o"];
        const B: [&str; 4] = ["b_i", "b_f", "b_g", "b_o"];
        for k in 0..4 {
            out.push((W[k], &self.w[k]));
        }
        for k in 0..4 {
            out.push((U[k], &self.u[k]));
        }
        for k in 0..4 {
            out.push((B[k], &self.b[k]));
        }
        out.push(("out_w", &self.out_w));
        out.push(("out_b", &self.out_b));
        out
    }

    pub(crate) fn tensors_mut(&mut self) -> Vec<(&'static str, &mut Tensor<S>)> {
        let LstmParams {
            embedding,
            w,
            u,
            b,
            out_w,
            out_b,
        } = self;
        let mut out: Vec<(&'static str, &mut Tensor<S>)> = vec![("embedding", embedding)];
        let [w0, w1, w2, w3] = w;
        let [u0, u1, u2, u3] = u;
        let [b0, b1, b2, b3] = b;
        out.push(("w_i", w0));
        out.push(("w_f", w1));
        out.push(("w_g", w2));
        out.push(("w_o", w3));
        out.push(("u_i", u0));
        out.push(("u_f", u1));
        out.push(("u_g", u2));
        out.push(("u_o", u3));
        out.push(("b_i", b0));
        out.push(("b_f", b1));
        out.push(("b_g", b2));
        out.push(("b_o", b3));
        out.push(("out_w", out_w));
        out.push(("out_b", out_b));
        out
    }
}

struct LstmCache<S> {
    /// Gate inputs x̃_t (input mask already applied), one per step.
    xs: Vec<Vec<S>>,
    hs: Vec<Vec<S>>,
    cs: Vec<Vec<S>>,
    /// Activated gate values [i, f, g, o] per step.
    gates: Vec<[Vec<S>; 4]>,
    tanh_c: Vec<Vec<S>>,
    mask_in: Vec<S>,
    mask_rec: Vec<S>,
}

/// Standard LSTM recurrence over an embedded sequence, returning the final
/// hidden state. In train mode one input mask and one recurrent mask are
/// sampled per sequence and reused at every step (variational dropout).
pub fn lstm_forward<S: Scalar, R: Rng>(
    params: &LstmParams<S>,
    embedded: &Tensor<S>,
    dropout_rates: (f64, f64),
    mode: Mode,
    rng: &mut R,
) -> Result<Vec<S>> {
    lstm_forward_cache(params, embedded, dropout_rates, mode, rng).map(|c| {
        c.hs.last().cloned().unwrap_or_else(|| vec![S::zero(); params.units()])
    })
}

fn lstm_forward_cache<S: Scalar, R: Rng>(
    params: &LstmParams<S>,
    embedded: &Tensor<S>,
    (rate_in, rate_rec): (f64, f64),
    mode: Mode,
    rng: &mut R,
) -> Result<LstmCache<S>> {
    let dims = params.dims();
    if embedded.shape()[1] != dims.emb_dim {
        return Err(Error::shape(format!(
            "lstm expects embedding dim {}, got {}",
            dims.emb_dim,
            embedded.shape()[1]
        )));
    }
    let steps = embedded.shape()[0];
    let units = dims.units;
    let mask_in: Vec<S> = channel_mask(dims.emb_dim, rate_in, mode, rng)?;
    let mask_rec: Vec<S> = channel_mask(units, rate_rec, mode, rng)?;

    let mut cache = LstmCache {
        xs: Vec::with_capacity(steps),
        hs: Vec::with_capacity(steps),
        cs: Vec::with_capacity(steps),
        gates: Vec::with_capacity(steps),
        tanh_c: Vec::with_capacity(steps),
        mask_in,
        mask_rec,
    };

    let mut h_prev = vec![S::zero(); units];
    let mut c_prev = vec![S::zero(); units];

    for t in 0..steps {
        let x: Vec<S> = embedded
            .row(t)
            .iter()
            .zip(cache.mask_in.iter())
            .map(|(&v, &m)| v * m)
            .collect();
        let h_masked: Vec<S> = h_prev
            .iter()
            .zip(cache.mask_rec.iter())
            .map(|(&v, &m)| v * m)
            .collect();

        // Pre-activations for all four gates.
        let mut pre = [
            params.b[0].data().to_vec(),
            params.b[1].data().to_vec(),
            params.b[2].data().to_vec(),
            params.b[3].data().to_vec(),
        ];
        for k in 0..4 {
            let w = &params.w[k];
            let u = &params.u[k];
            let pre_k = &mut pre[k];
            for unit in 0..units {
                let mut acc = pre_k[unit];
                for (wv, xv) in w.row(unit).iter().zip(x.iter()) {
                    acc += *wv * *xv;
                }
                for (uv, hv) in u.row(unit).iter().zip(h_masked.iter()) {
                    acc += *uv * *hv;
                }
                pre_k[unit] = acc;
            }
        }

        let i: Vec<S> = pre[GATE_I].iter().map(|&z| sigmoid(z)).collect();
        let f: Vec<S> = pre[GATE_F].iter().map(|&z| sigmoid(z)).collect();
        let g: Vec<S> = pre[GATE_G].iter().map(|&z| z.tanh()).collect();
        let o: Vec<S> = pre[GATE_O].iter().map(|&z| sigmoid(z)).collect();

        let mut c = vec![S::zero(); units];
        let mut tanh_c = vec![S::zero(); units];
        let mut h = vec![S::zero(); units];
        for unit in 0..units {
            c[unit] = f[unit] * c_prev[unit] + i[unit] * g[unit];
            tanh_c[unit] = c[unit].tanh();
            h[unit] = o[unit] * tanh_c[unit];
        }

        cache.xs.push(x);
        cache.gates.push([i, f, g, o]);
        cache.tanh_c.push(tanh_c);
        cache.cs.push(c.clone());
        cache.hs.push(h.clone());
        h_prev = h;
        c_prev = c;
    }

    Ok(cache)
}

pub(crate) fn lstm_model_forward<S: Scalar, R: Rng>(
    params: &LstmParams<S>,
    seq: &[usize],
    mode: Mode,
    layers: &LayerConfig,
    rng: &mut R,
) -> Result<Probabilities<S>> {
    let embedded = embedding_forward(&params.embedding, seq)?;
    let (dropped, _mask) = spatial_dropout_masked(&embedded, layers.spatial_dropout, mode, rng)?;
    let hidden = lstm_forward(
        params,
        &dropped,
        (layers.lstm_dropout, layers.lstm_recurrent_dropout),
        mode,
        rng,
    )?;
    let logits = dense_logits(&params.out_w, &params.out_b, &hidden)?;
    Ok(Probabilities::from_distribution(softmax(&logits)))
}

/// Forward with caches plus full backpropagation through time. Dropout masks
/// are sampled once here and shared by both directions.
pub(crate) fn lstm_model_backward<S: Scalar, R: Rng>(
    params: &LstmParams<S>,
    seq: &[usize],
    truth: &[S],
    mode: Mode,
    layers: &LayerConfig,
    rng: &mut R,
) -> Result<(S, LstmParams<S>)> {
    let dims = params.dims();
    if truth.len() != dims.classes {
        return Err(Error::shape(format!(
            "truth vector has {} entries, model has {} classes",
            truth.len(),
            dims.classes
        )));
    }
    let units = dims.units;
    let steps = seq.len();

    let embedded = embedding_forward(&params.embedding, seq)?;
    let (dropped, spatial_mask) =
        spatial_dropout_masked(&embedded, layers.spatial_dropout, mode, rng)?;
    let cache = lstm_forward_cache(
        params,
        &dropped,
        (layers.lstm_dropout, layers.lstm_recurrent_dropout),
        mode,
        rng,
    )?;

    let zero_h = vec![S::zero(); units];
    let h_last = cache.hs.last().unwrap_or(&zero_h);
    let logits = dense_logits(&params.out_w, &params.out_b, h_last)?;
    let probs = softmax(&logits);
    let loss = cross_entropy(truth, &probs)?;
    let delta = softmax_ce_delta(&probs, truth);

    let mut grads = params.zeros_like();

    // Dense head.
    grads.out_b.data_mut().copy_from_slice(&delta);
    let mut d_h = vec![S::zero(); units];
    for unit in 0..units {
        let w_row = params.out_w.row(unit);
        let gw_row = grads.out_w.row_mut(unit);
        let hv = h_last[unit];
        let mut acc = S::zero();
        for (c, &d) in delta.iter().enumerate() {
            gw_row[c] = hv * d;
            acc += w_row[c] * d;
        }
        d_h[unit] = acc;
    }

    // Backpropagation through time.
    let mut d_c = vec![S::zero(); units];
    let mut d_input = Tensor::<S>::zeros(&[steps, dims.emb_dim]);
    for t in (0..steps).rev() {
        let [i, f, g, o] = &cache.gates[t];
        let tanh_c = &cache.tanh_c[t];
        let c_prev = if t > 0 { &cache.cs[t - 1] } else { &zero_h };
        let h_prev = if t > 0 { &cache.hs[t - 1] } else { &zero_h };

        // Gate pre-activation deltas, order i, f, g, o.
        let mut d_pre = [
            vec![S::zero(); units],
            vec![S::zero(); units],
            vec![S::zero(); units],
            vec![S::zero(); units],
        ];
        for unit in 0..units {
            let d_o = d_h[unit] * tanh_c[unit];
            d_pre[GATE_O][unit] = d_o * o[unit] * (S::one() - o[unit]);

            let dc = d_c[unit] + d_h[unit] * o[unit] * (S::one() - tanh_c[unit] * tanh_c[unit]);

            let d_f = dc * c_prev[unit];
            d_pre[GATE_F][unit] = d_f * f[unit] * (S::one() - f[unit]);

            let d_i = dc * g[unit];
            d_pre[GATE_I][unit] = d_i * i[unit] * (S::one() - i[unit]);

            let d_g = dc * i[unit];
            d_pre[GATE_G][unit] = d_g * (S::one() - g[unit] * g[unit]);

            d_c[unit] = dc * f[unit];
        }

        let x = &cache.xs[t];
        let h_masked: Vec<S> = h_prev
            .iter()
            .zip(cache.mask_rec.iter())
            .map(|(&v, &m)| v * m)
            .collect();

        let mut d_h_prev = vec![S::zero(); units];
        let d_x_row = d_input.row_mut(t);
        for k in 0..4 {
            let dp = &d_pre[k];
            let gw = grads.w[k].data_mut();
            let gu = grads.u[k].data_mut();
            let gb = grads.b[k].data_mut();
            let w = &params.w[k];
            let u = &params.u[k];
            for unit in 0..units {
                let d = dp[unit];
                if d == S::zero() {
                    continue;
                }
                gb[unit] += d;
                let wg_row = &mut gw[unit * dims.emb_dim..(unit + 1) * dims.emb_dim];
                for (slot, &xv) in wg_row.iter_mut().zip(x.iter()) {
                    *slot += d * xv;
                }
                let ug_row = &mut gu[unit * units..(unit + 1) * units];
                for (slot, &hv) in ug_row.iter_mut().zip(h_masked.iter()) {
                    *slot += d * hv;
                }
                let w_row = w.row(unit);
                for (slot, &wv) in d_x_row.iter_mut().zip(w_row.iter()) {
                    *slot += d * wv;
                }
                let u_row = u.row(unit);
                for (slot, &uv) in d_h_prev.iter_mut().zip(u_row.iter()) {
                    *slot += d * uv;
                }
            }
        }

        // The gate input was x ⊙ mask_in; fold the mask into the input grad.
        for (slot, &m) in d_input.row_mut(t).iter_mut().zip(cache.mask_in.iter()) {
            *slot *= m;
        }
        // The recurrent path saw h_prev ⊙ mask_rec.
        for (slot, &m) in d_h_prev.iter_mut().zip(cache.mask_rec.iter()) {
            *slot *= m;
        }
        d_h = d_h_prev;
    }

    // Back through the spatial dropout, then scatter into embedding rows.
    for (t, &idx) in seq.iter().enumerate() {
        let src = d_input.row(t);
        let dst = grads.embedding.row_mut(idx);
        for ((d, s), &m) in dst.iter_mut().zip(src.iter()).zip(spatial_mask.iter()) {
            *d += *s * m;
        }
    }

    grads.embedding.debug_assert_finite("lstm embedding gradient");
    Ok((loss, grads))
}

//! Single-layer LSTM with zero initial state.
//!
//! Gate pre-activations are stacked as `[input, forget, candidate, output]`:
//!
//! ```text
//! z_t = W_x x_t + W_h h_{t-1} + b
//! i = σ(z_i)   f = σ(z_f)   g = tanh(z_g)   o = σ(z_o)
//! c_t = f ⊙ c_{t-1} + i ⊙ g
//! h_t = o ⊙ tanh(c_t)
//! ```

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::ops::sigmoid;
use super::optim::{init_bound, Parameters};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub input_dim: usize,
    pub hidden_dim: usize,
    /// `4h × input`
    pub w_x: Matrix,
    /// `4h × h`
    pub w_h: Matrix,
    /// `4h × 1`
    pub bias: Matrix,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dim,
            w_x: Matrix::zeros(4 * hidden_dim, input_dim),
            w_h: Matrix::zeros(4 * hidden_dim, hidden_dim),
            bias: Matrix::zeros(4 * hidden_dim, 1),
        }
    }

    pub fn init<R: Rng + ?Sized>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        let bound = init_bound(input_dim + hidden_dim);
        Self {
            input_dim,
            hidden_dim,
            w_x: Matrix::uniform(4 * hidden_dim, input_dim, bound, rng),
            w_h: Matrix::uniform(4 * hidden_dim, hidden_dim, bound, rng),
            bias: Matrix::uniform(4 * hidden_dim, 1, bound, rng),
        }
    }
}

impl Parameters for LstmParams {
    fn tensors(&self) -> Vec<&Matrix> {
        vec![&self.w_x, &self.w_h, &self.bias]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        vec![&mut self.w_x, &mut self.w_h, &mut self.bias]
    }
}

#[derive(Clone, Debug)]
struct Step {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    i: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    o: Vec<f64>,
    tanh_c: Vec<f64>,
}

/// Activations kept for backpropagation.
#[derive(Clone, Debug)]
pub struct LstmCache {
    steps: Vec<Step>,
    pub final_hidden: Vec<f64>,
}

pub fn lstm_forward(params: &LstmParams, inputs: &[Vec<f64>]) -> Result<LstmCache> {
    if inputs.is_empty() {
        return Err(Error::Input("empty input sequence".into()));
    }
    let h = params.hidden_dim;
    let mut h_prev = vec![0.0; h];
    let mut c_prev = vec![0.0; h];
    let mut z = vec![0.0; 4 * h];
    let mut steps = Vec::with_capacity(inputs.len());
    for (t, x) in inputs.iter().enumerate() {
        if x.len() != params.input_dim {
            return Err(Error::Shape(format!(
                "step {t}: input has {} values, LSTM expects {}",
                x.len(),
                params.input_dim
            )));
        }
        z.copy_from_slice(&params.bias.data);
        params.w_x.matvec_add(x, &mut z);
        params.w_h.matvec_add(&h_prev, &mut z);
        let i: Vec<f64> = z[0..h].iter().map(|&v| sigmoid(v)).collect();
        let f: Vec<f64> = z[h..2 * h].iter().map(|&v| sigmoid(v)).collect();
        let g: Vec<f64> = z[2 * h..3 * h].iter().map(|v| v.tanh()).collect();
        let o: Vec<f64> = z[3 * h..4 * h].iter().map(|&v| sigmoid(v)).collect();
        let c: Vec<f64> = (0..h).map(|k| f[k] * c_prev[k] + i[k] * g[k]).collect();
        let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
        let h_new: Vec<f64> = (0..h).map(|k| o[k] * tanh_c[k]).collect();
        steps.push(Step {
            x: x.clone(),
            h_prev: std::mem::replace(&mut h_prev, h_new),
            c_prev: std::mem::replace(&mut c_prev, c),
            i,
            f,
            g,
            o,
            tanh_c,
        });
    }
    Ok(LstmCache {
        steps,
        final_hidden: h_prev,
    })
}

/// Backpropagates `d_hidden = ∂L/∂h_T` through time, accumulating parameter
/// gradients into `grads`. Returns `∂L/∂x_t` per step when `input_grads`.
pub fn lstm_backward(
    params: &LstmParams,
    cache: &LstmCache,
    d_hidden: &[f64],
    grads: &mut LstmParams,
    input_grads: bool,
) -> Option<Vec<Vec<f64>>> {
    let h = params.hidden_dim;
    let mut dh = d_hidden.to_vec();
    let mut dc = vec![0.0; h];
    let mut dz = vec![0.0; 4 * h];
    let mut dxs = input_grads.then(|| vec![Vec::new(); cache.steps.len()]);
    for (t, s) in cache.steps.iter().enumerate().rev() {
        for k in 0..h {
            let tc = s.tanh_c[k];
            dz[3 * h + k] = dh[k] * tc * s.o[k] * (1.0 - s.o[k]);
            dc[k] += dh[k] * s.o[k] * (1.0 - tc * tc);
            dz[k] = dc[k] * s.g[k] * s.i[k] * (1.0 - s.i[k]);
            dz[2 * h + k] = dc[k] * s.i[k] * (1.0 - s.g[k] * s.g[k]);
            dz[h + k] = dc[k] * s.c_prev[k] * s.f[k] * (1.0 - s.f[k]);
            dc[k] *= s.f[k];
        }
        grads.w_x.add_outer(&dz, &s.x);
        grads.w_h.add_outer(&dz, &s.h_prev);
        grads
            .bias
            .data
            .iter_mut()
            .zip(&dz)
            .for_each(|(b, d)| *b += d);
        if let Some(dxs) = dxs.as_mut() {
            let mut dx = vec![0.0; params.input_dim];
            params.w_x.t_matvec_add(&dz, &mut dx);
            dxs[t] = dx;
        }
        dh.iter_mut().for_each(|v| *v = 0.0);
        params.w_h.t_matvec_add(&dz, &mut dh);
    }
    dxs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradcheck::grad_check;
    use crate::nn::matrix::dot;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_inputs(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn zero_weights_give_zero_state() {
        let p = LstmParams::zeros(3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cache = lstm_forward(&p, &random_inputs(&mut rng, 5, 3)).unwrap();
        assert_eq!(cache.final_hidden, vec![0.0; 4]);
    }

    #[test]
    fn single_step_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = LstmParams::init(3, 2, &mut rng);
        let x = random_inputs(&mut rng, 1, 3);
        let got = lstm_forward(&p, &x).unwrap().final_hidden;
        // h0 = c0 = 0, so h = σ(z_o) tanh(σ(z_i) tanh(z_g))
        for k in 0..2 {
            let z = |gate: usize| dot(p.w_x.row(gate * 2 + k), &x[0]) + p.bias.data[gate * 2 + k];
            let s = |v: f64| 1.0 / (1.0 + (-v).exp());
            let expected = s(z(3)) * (s(z(0)) * z(2).tanh()).tanh();
            assert!((got[k] - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let p = LstmParams::zeros(3, 2);
        assert!(matches!(
            lstm_forward(&p, &[vec![0.0; 2]]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(lstm_forward(&p, &[]), Err(Error::Input(_))));
    }

    #[test]
    fn backward_matches_finite_differences() {
        for seed in 0..3 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = LstmParams::init(4, 3, &mut rng);
            let xs = random_inputs(&mut rng, 5, 4);
            let target: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            // L = <target, h_T> + ½|h_T|²
            let loss = |q: &LstmParams| {
                let h = lstm_forward(q, &xs).unwrap().final_hidden;
                dot(&target, &h) + 0.5 * dot(&h, &h)
            };
            let cache = lstm_forward(&p, &xs).unwrap();
            let dh: Vec<f64> = target.iter().zip(&cache.final_hidden).map(|(t, h)| t + h).collect();
            let mut grads = p.zeros_like();
            let dxs = lstm_backward(&p, &cache, &dh, &mut grads, true).unwrap();
            let report = grad_check(loss, &p, &grads, 1e-4);
            assert!(report.passed(), "seed {seed}: {report:?}");

            // input gradient, first step, first coordinate
            let eps = 1e-5;
            let mut plus = xs.clone();
            plus[0][0] += eps;
            let mut minus = xs.clone();
            minus[0][0] -= eps;
            let f = |x: &[Vec<f64>]| {
                let h = lstm_forward(&p, x).unwrap().final_hidden;
                dot(&target, &h) + 0.5 * dot(&h, &h)
            };
            let numeric = (f(&plus) - f(&minus)) / (2.0 * eps);
            assert!((numeric - dxs[0][0]).abs() < 1e-8);
        }
    }
}

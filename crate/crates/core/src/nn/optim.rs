//! Plain SGD over any set of matrices.

use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// Global ℓ2 gradient-norm cap; `0` disables clipping.
    pub clip_norm: f64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            epochs: 50,
            batch_size: 32,
            seed: 0,
            patience: 5,
            clip_norm: 5.0,
        }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if self.clip_norm < 0.0 {
            return Err(Error::Config("clip norm must be non-negative".into()));
        }
        Ok(())
    }
}

/// A fixed collection of parameter tensors. Gradient containers use the same
/// type, so shapes line up tensor by tensor.
pub trait Parameters: Clone {
    fn tensors(&self) -> Vec<&Matrix>;
    fn tensors_mut(&mut self) -> Vec<&mut Matrix>;

    fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.fill(0.0);
        }
        z
    }

    fn num_values(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }

    fn l2_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .map(|t| t.sum_squares())
            .sum::<f64>()
            .sqrt()
    }

    fn scale(&mut self, s: f64) {
        for t in self.tensors_mut() {
            t.scale(s);
        }
    }

    /// `self += other`.
    fn accumulate(&mut self, other: &Self) -> Result<()> {
        let src = other.tensors();
        let mut dst = self.tensors_mut();
        check_shapes(&dst.iter().map(|t| &**t).collect::<Vec<_>>(), &src)?;
        for (d, s) in dst.iter_mut().zip(src) {
            d.data.iter_mut().zip(&s.data).for_each(|(a, b)| *a += b);
        }
        Ok(())
    }
}

fn check_shapes(a: &[&Matrix], b: &[&Matrix]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "{} tensors vs {} tensors",
            a.len(),
            b.len()
        )));
    }
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        if !x.same_shape(y) {
            return Err(Error::Shape(format!(
                "tensor {i}: {}x{} vs {}x{}",
                x.rows, x.cols, y.rows, y.cols
            )));
        }
    }
    Ok(())
}

/// `p ← p − lr · g`.
pub fn sgd_step<P: Parameters>(params: &mut P, grads: &P, config: &SgdConfig) -> Result<()> {
    let g = grads.tensors();
    let mut p = params.tensors_mut();
    check_shapes(&p.iter().map(|t| &**t).collect::<Vec<_>>(), &g)?;
    let lr = config.learning_rate;
    for (pt, gt) in p.iter_mut().zip(g) {
        pt.data
            .iter_mut()
            .zip(&gt.data)
            .for_each(|(w, d)| *w -= lr * d);
    }
    Ok(())
}

/// Rescales `grads` so its global norm is at most `max_norm`. Returns the
/// norm before clipping.
pub fn clip_grad_norm<P: Parameters>(grads: &mut P, max_norm: f64) -> f64 {
    let norm = grads.l2_norm();
    if max_norm > 0.0 && norm > max_norm {
        grads.scale(max_norm / norm);
    }
    norm
}

/// Fan-in scaled uniform initialization bound.
pub fn init_bound(fan_in: usize) -> f64 {
    1.0 / (fan_in.max(1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone, Debug)]
    struct Scalar(Matrix);

    impl Parameters for Scalar {
        fn tensors(&self) -> Vec<&Matrix> {
            vec![&self.0]
        }
        fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
            vec![&mut self.0]
        }
    }

    fn scalar(v: f64) -> Scalar {
        Scalar(Matrix::from_vec(1, 1, vec![v]).unwrap())
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = scalar(0.7);
        sgd_step(&mut p, &scalar(0.0), &SgdConfig::default()).unwrap();
        assert_eq!(p.0.data[0], 0.7);
    }

    #[test]
    fn one_step_arithmetic() {
        let mut p = scalar(1.0);
        sgd_step(&mut p, &scalar(1.0), &SgdConfig::default()).unwrap();
        assert!((p.0.data[0] - 0.99).abs() < 1e-15);
    }

    #[test]
    fn quadratic_bowl_converges() {
        // f(p) = p², f'(p) = 2p
        let mut p = scalar(1.0);
        let cfg = SgdConfig::default();
        for _ in 0..100 {
            let g = scalar(2.0 * p.0.data[0]);
            sgd_step(&mut p, &g, &cfg).unwrap();
        }
        // direct simulation: 0.98^100
        assert!((p.0.data[0] - 0.98f64.powi(100)).abs() < 1e-12);
        assert!(p.0.data[0].abs() < 0.2);
    }

    #[test]
    fn shape_mismatch() {
        let mut p = scalar(1.0);
        let g = Scalar(Matrix::zeros(2, 1));
        assert!(matches!(
            sgd_step(&mut p, &g, &SgdConfig::default()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn clipping_caps_the_norm() {
        let mut g = Scalar(Matrix::from_vec(1, 2, vec![30.0, 40.0]).unwrap());
        let before = clip_grad_norm(&mut g, 5.0);
        assert_eq!(before, 50.0);
        assert!((g.l2_norm() - 5.0).abs() < 1e-12);
        let mut small = scalar(1.0);
        clip_grad_norm(&mut small, 5.0);
        assert_eq!(small.0.data[0], 1.0);
    }

    #[test]
    fn invalid_configs() {
        let bad = SgdConfig {
            learning_rate: 0.0,
            ..SgdConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}

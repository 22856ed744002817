//! Activations and the softmax / cross-entropy pair.

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `-log softmax(logits)[target]`, computed without forming the softmax.
pub fn cross_entropy(logits: &[f64], target: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
    lse - logits[target]
}

/// Gradient of [`cross_entropy`] w.r.t. the logits: `softmax - onehot`.
pub fn cross_entropy_grad(probs: &[f64], target: usize) -> Vec<f64> {
    let mut g = probs.to_vec();
    g[target] -= 1.0;
    g
}

/// Index of the largest value; ties go to the smallest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn symmetric_logits() {
        assert_eq!(softmax(&[0.0, 0.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn large_logits_do_not_overflow() {
        let p = softmax(&[1000.0, 0.0]);
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert!(p[1] >= 0.0 && p[1] < 1e-300);
        assert!(cross_entropy(&[1000.0, 0.0], 1).is_finite());
    }

    #[test]
    fn matches_naive_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let z: Vec<f64> = (0..10).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let naive_total: f64 = z.iter().map(|v| v.exp()).sum();
            let p = softmax(&z);
            for (pi, zi) in p.iter().zip(&z) {
                assert!((pi - zi.exp() / naive_total).abs() < 1e-12);
            }
            let t = rng.gen_range(0..10);
            assert!((cross_entropy(&z, t) + (z[t].exp() / naive_total).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0);
        assert!((sigmoid(800.0) - 1.0).abs() < 1e-15);
        assert!((sigmoid(1.3) + sigmoid(-1.3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn argmax_prefers_first() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
    }
}

//! Central finite-difference gradient checking.

use super::optim::Parameters;

/// Step used for central differences.
pub const FD_EPSILON: f64 = 1e-5;

/// Denominator floor of the relative error, so coordinates whose true
/// gradient is ~0 are judged by absolute error instead.
pub const REL_ERROR_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_rel_error: f64,
    /// (tensor, flat index) of the worst coordinate.
    pub worst: (usize, usize),
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error < self.tolerance
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR)
}

/// Compares `analytic` against `(f(p + ε) − f(p − ε)) / 2ε` for every
/// coordinate of `params`.
pub fn grad_check<P, F>(f: F, params: &P, analytic: &P, tolerance: f64) -> GradCheckReport
where
    P: Parameters,
    F: Fn(&P) -> f64,
{
    let mut probe = params.clone();
    let analytic_tensors: Vec<Vec<f64>> = analytic.tensors().iter().map(|t| t.data.clone()).collect();
    let sizes: Vec<usize> = params.tensors().iter().map(|t| t.data.len()).collect();
    let mut report = GradCheckReport {
        checked: 0,
        max_rel_error: 0.0,
        worst: (0, 0),
        tolerance,
    };
    for (ti, &size) in sizes.iter().enumerate() {
        for i in 0..size {
            let original = probe.tensors()[ti].data[i];
            probe.tensors_mut()[ti].data[i] = original + FD_EPSILON;
            let plus = f(&probe);
            probe.tensors_mut()[ti].data[i] = original - FD_EPSILON;
            let minus = f(&probe);
            probe.tensors_mut()[ti].data[i] = original;
            let numeric = (plus - minus) / (2.0 * FD_EPSILON);
            let err = relative_error(analytic_tensors[ti][i], numeric);
            if err > report.max_rel_error {
                report.max_rel_error = err;
                report.worst = (ti, i);
            }
            report.checked += 1;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Matrix;

    #[derive(Clone)]
    struct Vector(Matrix);

    impl Parameters for Vector {
        fn tensors(&self) -> Vec<&Matrix> {
            vec![&self.0]
        }
        fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
            vec![&mut self.0]
        }
    }

    #[test]
    fn sum_of_squares_is_exact() {
        let p = Vector(Matrix::from_vec(1, 4, vec![0.3, -1.2, 2.0, 0.0]).unwrap());
        let mut g = p.clone();
        g.0.data.iter_mut().for_each(|v| *v *= 2.0);
        let report = grad_check(|q: &Vector| q.0.sum_squares(), &p, &g, 1e-8);
        assert_eq!(report.checked, 4);
        assert!(report.max_rel_error < 1e-8, "{}", report.max_rel_error);
    }

    #[test]
    fn wrong_gradient_is_caught() {
        let p = Vector(Matrix::from_vec(1, 2, vec![1.0, 2.0]).unwrap());
        let wrong = Vector(Matrix::from_vec(1, 2, vec![2.0, 3.0]).unwrap());
        let report = grad_check(|q: &Vector| q.0.sum_squares(), &p, &wrong, 1e-4);
        assert!(!report.passed());
        assert_eq!(report.worst, (0, 1));
    }
}

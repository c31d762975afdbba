//! Central finite-difference gradient checking.
//!
//! Used by the test suites to validate every differentiable operation and
//! the end-to-end loss against a numeric oracle that is independent of the
//! tape's backward rules.

use crate::mat::Mat;

/// Numeric gradient of a scalar function of one matrix, central differences
/// with the given step.
pub fn finite_difference_grad(f: &mut dyn FnMut(&Mat) -> f64, x: &Mat, step: f64) -> Mat {
    let mut grad = Mat::zeros(x.rows(), x.cols());
    let mut probe = x.clone();
    for idx in 0..x.data().len() {
        let orig = probe.data()[idx];
        probe.data_mut()[idx] = orig + step;
        let plus = f(&probe);
        probe.data_mut()[idx] = orig - step;
        let minus = f(&probe);
        probe.data_mut()[idx] = orig;
        grad.data_mut()[idx] = (plus - minus) / (2.0 * step);
    }
    grad
}

/// Worst relative error between an analytic and a numeric gradient. Entries
/// where both are tiny count as exact; elsewhere the denominator is the
/// larger magnitude.
pub fn max_relative_error(analytic: &Mat, numeric: &Mat) -> f64 {
    assert_eq!(analytic.shape(), numeric.shape());
    let mut worst: f64 = 0.0;
    for (&a, &n) in analytic.data().iter().zip(numeric.data()) {
        let scale = a.abs().max(n.abs());
        if scale < 1e-7 {
            continue;
        }
        worst = worst.max((a - n).abs() / scale.max(1e-3));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_differences_of_a_quadratic() {
        // f(x) = sum x^2, gradient 2x.
        let x = Mat::from_rows(&[&[1.0, -2.0], &[0.5, 3.0]]);
        let mut f = |m: &Mat| m.data().iter().map(|&v| v * v).sum::<f64>();
        let g = finite_difference_grad(&mut f, &x, 1e-6);
        let expect = x.scale(2.0);
        assert!(max_relative_error(&expect, &g) < 1e-9);
    }
}

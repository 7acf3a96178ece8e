use std::f64::consts::PI;

use super::normal::{normal_pdf, quantile};
use super::Model;
use crate::error::{invalid, Result};
use crate::Interval;

/// Normalized weighted sum of independent standard normals,
/// `X = (a_1 Z_1 + ... + a_s Z_s) / sigma` with `sigma^2 = sum a_j^2`.
/// `X` is standard normal for every choice of weights.
#[derive(Clone, Debug, PartialEq)]
pub struct SumOfNormals {
    coeffs: Vec<f64>,
    interval: Interval,
}

impl SumOfNormals {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite()) {
            return Err(invalid("sum of normals needs finite weights"));
        }
        let sigma = weights.iter().map(|a| a * a).sum::<f64>().sqrt();
        if sigma == 0.0 {
            return Err(invalid("sum of normals needs a nonzero weight vector"));
        }
        Ok(SumOfNormals {
            coeffs: weights.iter().map(|a| a / sigma).collect(),
            interval: Interval { a: -2.0, b: 2.0 },
        })
    }

    /// All weights equal.
    pub fn equal(s: usize) -> Result<Self> {
        Self::new(vec![1.0; s])
    }

    /// Weights `a_j = 2^-j`, `j = 1..s`.
    pub fn geometric(s: usize) -> Result<Self> {
        Self::new((1..=s).map(|j| 0.5f64.powi(j as i32)).collect())
    }

    pub fn with_interval(mut self, interval: Interval) -> Self {
        self.interval = interval;
        self
    }

    /// Normalized weights `a_j / sigma`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }
}

impl Model for SumOfNormals {
    fn name(&self) -> String {
        format!("normal-sum(s={})", self.coeffs.len())
    }

    fn dim(&self) -> usize {
        self.coeffs.len()
    }

    #[inline]
    fn eval(&self, u: &[f64]) -> f64 {
        self.coeffs.iter().zip(u).map(|(a, &u)| a * quantile(u)).sum()
    }

    fn interval(&self) -> Interval {
        self.interval
    }

    fn density(&self, x: f64) -> Option<f64> {
        Some(normal_pdf(x))
    }

    fn exact_rf2(&self) -> Option<f64> {
        Some(normal_rf2(self.interval.a, self.interval.b))
    }

    fn monotone_signs(&self) -> Option<Vec<f64>> {
        Some(self.coeffs.iter().map(|a| if *a < 0.0 { -1.0 } else { 1.0 }).collect())
    }
}

/// Antiderivative of `(phi''(x))^2` for the standard normal density.
fn rf2_antiderivative(x: f64) -> f64 {
    let gauss_integral = 0.5 * PI.sqrt() * libm::erf(x);
    ((-x * x * x + 0.5 * x) * (-x * x).exp() + 1.5 * gauss_integral) / (4.0 * PI)
}

/// `R(f'')` of the standard normal over `[a, b]`.
pub fn normal_rf2(a: f64, b: f64) -> f64 {
    rf2_antiderivative(b) - rf2_antiderivative(a)
}

/// `R(f'')` of the standard normal over `[-b, b]`:
/// `[-b (2b^2 - 1) e^(-b^2) + 3 int_0^b e^(-x^2) dx] / (4 pi)`.
pub fn exact_normal_rf2(b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(invalid(format!("half-width must be positive, got {b}")));
    }
    let gauss_integral = 0.5 * PI.sqrt() * libm::erf(b);
    Ok((-b * (2.0 * b * b - 1.0) * (-b * b).exp() + 3.0 * gauss_integral) / (4.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Gaussian, Kernel};
    use crate::models::normal_cdf;
    use crate::pointsets::sample_mc;
    use crate::quadrature::simpson;

    #[test]
    fn evaluates_examples() {
        let m = SumOfNormals::equal(1).unwrap();
        assert_eq!(m.eval(&[0.5]), 0.0);
        let m = SumOfNormals::equal(2).unwrap();
        let u = normal_cdf(1.0);
        assert!((u - 0.841_345).abs() < 1e-6);
        assert!((m.eval(&[u, u]) - 2f64.sqrt()).abs() < 1e-12);
        let g = SumOfNormals::geometric(3).unwrap();
        let c = g.coefficients();
        assert!((c[0] / c[1] - 2.0).abs() < 1e-14 && (c[1] / c[2] - 2.0).abs() < 1e-14);
        assert!(SumOfNormals::new(vec![0.0, 0.0]).is_err());
        assert!(SumOfNormals::new(vec![]).is_err());
    }

    #[test]
    fn rf2_closed_form() {
        let r = exact_normal_rf2(2.0).unwrap();
        assert!((r - 0.19018).abs() < 1e-4, "{r}");
        assert!((r / 4.0 - 0.04754).abs() < 1e-5);
        let full = exact_normal_rf2(40.0).unwrap();
        assert!((full - 3.0 / (8.0 * PI.sqrt())).abs() < 1e-14);
        assert!((full - 0.21157).abs() < 1e-5);
        // Quadrature oracle of (f'')^2 on [-2, 2].
        let q = simpson(|x| Gaussian.deriv(2, x).powi(2), -2.0, 2.0, 2001).unwrap();
        assert!((q - r).abs() < 1e-12);
        assert!((normal_rf2(-2.0, 2.0) - r).abs() < 1e-13);
        assert!(exact_normal_rf2(0.0).is_err());
    }

    #[test]
    fn output_is_standard_normal() {
        // KS statistic of 2^16 draws against Phi, 0.001 critical value 1.95/sqrt(n).
        let n = 1 << 16;
        for weights in [vec![1.0], vec![1.0, -3.0, 0.5], (1..=7).map(|j| 0.5f64.powi(j)).collect()] {
            let m = SumOfNormals::new(weights).unwrap();
            let ps = sample_mc(m.dim(), n, 99).unwrap();
            let mut xs = m.outputs(&ps).unwrap();
            xs.sort_by(f64::total_cmp);
            let d = xs
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let f = normal_cdf(x);
                    (f - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - f)
                })
                .fold(0.0, f64::max);
            assert!(d < 1.95 / (n as f64).sqrt(), "KS {d}");
        }
    }
}

//! Smoothing kernels.
//!
//! Only the Gaussian kernel ships; estimators are written against [`Kernel`]
//! so other smooth symmetric densities can be plugged in.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::quadrature::simpson_values;

/// `1 / sqrt(2 pi)`.
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// A smooth probability density symmetric about zero.
pub trait Kernel: Sync {
    fn eval(&self, x: f64) -> f64;

    /// `r`-th derivative `k^(r)(x)`.
    fn deriv(&self, r: u32, x: f64) -> f64;

    /// `mu_0(k^2) = int k(x)^2 dx`.
    fn mu0_sq(&self) -> f64;

    /// Second moment `mu_2(k)`.
    fn mu2(&self) -> f64;

    /// Mode value `k(0)`.
    fn at_zero(&self) -> f64 {
        self.eval(0.0)
    }

    /// `mu_0((k^(r))^2)`.
    fn deriv_sq_mass(&self, r: u32) -> f64;

    /// Estimators ignore sample points farther than this many bandwidths away.
    fn support_radius(&self) -> f64;
}

/// The standard normal density.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Gaussian;

/// Probabilists' Hermite polynomial `He_r(x)`.
pub fn hermite(r: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if r == 0 {
        return prev;
    }
    for k in 1..r {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

impl Kernel for Gaussian {
    #[inline]
    fn eval(&self, x: f64) -> f64 {
        FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
    }

    fn deriv(&self, r: u32, x: f64) -> f64 {
        let sign = if r.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * hermite(r, x) * self.eval(x)
    }

    fn mu0_sq(&self) -> f64 {
        0.5 / PI.sqrt()
    }

    fn mu2(&self) -> f64 {
        1.0
    }

    fn at_zero(&self) -> f64 {
        FRAC_1_SQRT_2PI
    }

    /// `(2r)! / (2^(2r+1) r! sqrt(pi))`.
    fn deriv_sq_mass(&self, r: u32) -> f64 {
        let mut ratio = 1.0; // (2r)! / (r! 4^r)
        for k in (r + 1)..=(2 * r) {
            ratio *= k as f64 / 4.0;
        }
        ratio / (2.0 * PI.sqrt())
    }

    fn support_radius(&self) -> f64 {
        10.0
    }
}

/// Roughness `R(psi) = int_a^b psi(x)^2 dx` from values of `psi` on an
/// equispaced grid spanning `[a, b]` (odd node count, at least 129).
pub fn roughness(values: &[f64], a: f64, b: f64) -> Result<f64> {
    if !(a < b) {
        return Err(invalid(format!("roughness needs a < b (got [{a}, {b}])")));
    }
    if values.len() < 129 {
        return Err(invalid(format!(
            "roughness needs at least 129 grid nodes, got {}",
            values.len()
        )));
    }
    let squares: Vec<f64> = values.iter().map(|v| v * v).collect();
    simpson_values(&squares, (b - a) / (values.len() - 1) as f64)
}

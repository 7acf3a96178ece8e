//! Density estimation for simulation outputs `X = g(U)`, `U ~ U[0,1)^s`.
//!
//! The crate pairs a kernel density estimator with four ways of drawing the
//! underlying uniforms (Monte Carlo, stratification, and Sobol' nets under a
//! linear matrix scramble or a nested uniform scramble), and provides the
//! machinery to measure how the integrated variance (IV), integrated squared
//! bias (ISB) and mean integrated squared error (MISE) of the estimator scale
//! with the sample size `n` and the bandwidth `h`:
//!
//! * [`pointsets`]: samplers over the unit cube with reproducible seeding.
//! * [`kernel`]: the Gaussian kernel, its derivatives and moment constants.
//! * [`models`]: test models `g` and the normal inverse CDF.
//! * [`kde`]: the estimator and its derivative estimators.
//! * [`bandwidth`]: plug-in bandwidth selection.
//! * [`theory`]: closed-form asymptotic rates and variance bounds.
//! * [`harness`]: IV/MISE surfaces, log-log regression and out-of-sample checks.

pub mod bandwidth;
pub mod error;
pub mod harness;
pub mod kde;
pub mod kernel;
pub mod models;
pub mod pointsets;
pub mod quadrature;
pub mod seed;
pub mod theory;

pub use error::{Error, Result};
pub use kernel::{Gaussian, Kernel};
pub use models::Model;
pub use pointsets::{PointSet, SamplerKind, SamplerSpec};

/// A closed estimation interval `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(error::invalid(format!("invalid interval [{a}, {b}]")));
        }
        Ok(Interval { a, b })
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.a..=self.b).contains(&x)
    }
}

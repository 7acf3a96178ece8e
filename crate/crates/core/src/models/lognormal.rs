use std::collections::VecDeque;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::normal::quantile;
use super::Model;
use crate::error::{invalid, Error, Result};
use crate::Interval;

/// How the Brownian covariance is factored into `A A^T`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathConstruction {
    /// Eigendecomposition, eigenvalues in decreasing order.
    #[default]
    Pca,
    BrownianBridge,
    /// Cholesky factor: step-by-step random walk.
    Sequential,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightScheme {
    /// `w_j = s0 / s`: the arithmetic average of the observed prices.
    #[default]
    Average,
    /// `w_j = s0 (s - j + 1) / s`.
    Declining,
    Explicit(Vec<f64>),
}

/// Parameters of an arithmetic-average option on a geometric Brownian motion
/// observed at times `t_j = j / s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbmSpec {
    pub s: usize,
    pub s0: f64,
    pub strike: f64,
    pub sigma: f64,
    pub mu: f64,
    pub weights: WeightScheme,
    pub path: PathConstruction,
}

impl Default for GbmSpec {
    fn default() -> Self {
        GbmSpec {
            s: 12,
            s0: 100.0,
            strike: 101.0,
            sigma: 0.12136,
            mu: 0.1,
            weights: WeightScheme::Average,
            path: PathConstruction::Pca,
        }
    }
}

impl GbmSpec {
    pub fn weight_vector(&self) -> Result<Vec<f64>> {
        let s = self.s as f64;
        let w = match &self.weights {
            WeightScheme::Average => vec![self.s0 / s; self.s],
            WeightScheme::Declining => (1..=self.s)
                .map(|j| self.s0 * (s - j as f64 + 1.0) / s)
                .collect(),
            WeightScheme::Explicit(w) => {
                if w.len() != self.s {
                    return Err(invalid(format!("expected {} weights, got {}", self.s, w.len())));
                }
                w.clone()
            }
        };
        if w.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(invalid("option weights must be positive"));
        }
        Ok(w)
    }

    pub fn times(&self) -> Vec<f64> {
        (1..=self.s).map(|j| j as f64 / self.s as f64).collect()
    }

    /// Mean of the log-prices, `(mu - sigma^2 / 2) t_j`.
    pub fn log_mean(&self) -> Vec<f64> {
        let drift = self.mu - 0.5 * self.sigma * self.sigma;
        self.times().into_iter().map(|t| drift * t).collect()
    }

    /// Covariance of the log-prices, `sigma^2 min(t_i, t_j)`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let t = self.times();
        let v = self.sigma * self.sigma;
        DMatrix::from_fn(self.s, self.s, |i, j| v * t[i].min(t[j]))
    }

    /// Factor `A` with `A A^T` equal to [`covariance`](Self::covariance).
    pub fn factor(&self) -> Result<DMatrix<f64>> {
        let cov = self.covariance();
        match self.path {
            PathConstruction::Sequential => cov
                .cholesky()
                .map(|c| c.l())
                .ok_or_else(|| Error::Internal("covariance is not positive definite".into())),
            PathConstruction::Pca => {
                let eig = SymmetricEigen::new(cov);
                let mut order: Vec<usize> = (0..self.s).collect();
                order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
                if eig.eigenvalues.iter().any(|&l| l < -1e-12) {
                    return Err(Error::Internal("covariance has a negative eigenvalue".into()));
                }
                Ok(DMatrix::from_fn(self.s, self.s, |i, k| {
                    let col = order[k];
                    eig.eigenvectors[(i, col)] * eig.eigenvalues[col].max(0.0).sqrt()
                }))
            }
            PathConstruction::BrownianBridge => Ok(brownian_bridge(&self.times()) * self.sigma),
        }
    }
}

/// Coefficients of `B(t_i)` on the normals `z_k` under the Brownian-bridge
/// construction: `z_0` sets the terminal value, later normals fill midpoints
/// breadth first.
fn brownian_bridge(times: &[f64]) -> DMatrix<f64> {
    let s = times.len();
    let mut a = DMatrix::zeros(s, s);
    let time = |i: isize| if i < 0 { 0.0 } else { times[i as usize] };
    a[(s - 1, 0)] = times[s - 1].sqrt();
    let mut next = 1;
    let mut queue = VecDeque::from([(-1isize, s as isize - 1)]);
    while let Some((l, r)) = queue.pop_front() {
        if r - l < 2 {
            continue;
        }
        let m = (l + r).div_euclid(2);
        let (tl, tm, tr) = (time(l), time(m), time(r));
        let wl = (tr - tm) / (tr - tl);
        let wr = (tm - tl) / (tr - tl);
        for k in 0..s {
            let left = if l < 0 { 0.0 } else { a[(l as usize, k)] };
            a[(m as usize, k)] = wl * left + wr * a[(r as usize, k)];
        }
        a[(m as usize, next)] = ((tm - tl) * (tr - tm) / (tr - tl)).sqrt();
        next += 1;
        queue.push_back((l, m));
        queue.push_back((m, r));
    }
    a
}

/// Payoff-shifted weighted sum of lognormals, `X - K` with
/// `X = sum_j w_j exp(Y_j)` and `Y = mean + A z`, `z_j = Phi^-1(u_j)`.
///
/// Realizations below zero are kept: they contribute to the estimate near
/// the left end of the window.
#[derive(Clone, Debug, PartialEq)]
pub struct LognormalSum {
    spec: GbmSpec,
    mean: Vec<f64>,
    /// Row-major `s x s` factor.
    factor: Vec<f64>,
    weights: Vec<f64>,
    interval: Interval,
}

impl LognormalSum {
    pub fn new(spec: GbmSpec) -> Result<Self> {
        if spec.s == 0 {
            return Err(invalid("option model needs s >= 1"));
        }
        if !(spec.sigma > 0.0) {
            return Err(invalid(format!("volatility must be positive, got {}", spec.sigma)));
        }
        let weights = spec.weight_vector()?;
        let a = spec.factor()?;
        let s = spec.s;
        let factor = (0..s * s).map(|idx| a[(idx / s, idx % s)]).collect();
        Ok(LognormalSum {
            mean: spec.log_mean(),
            factor,
            weights,
            interval: Interval { a: 0.0, b: 27.13 },
            spec,
        })
    }

    pub fn with_interval(mut self, interval: Interval) -> Self {
        self.interval = interval;
        self
    }

    pub fn spec(&self) -> &GbmSpec {
        &self.spec
    }

    /// Log-prices `Y` for one point of the unit cube.
    pub fn log_prices(&self, u: &[f64]) -> Vec<f64> {
        let s = self.spec.s;
        let z: Vec<f64> = u.iter().map(|&v| quantile(v)).collect();
        (0..s)
            .map(|i| {
                self.mean[i]
                    + self.factor[i * s..(i + 1) * s]
                        .iter()
                        .zip(&z)
                        .map(|(a, z)| a * z)
                        .sum::<f64>()
            })
            .collect()
    }
}

impl Model for LognormalSum {
    fn name(&self) -> String {
        format!("option(s={})", self.spec.s)
    }

    fn dim(&self) -> usize {
        self.spec.s
    }

    fn eval(&self, u: &[f64]) -> f64 {
        let s = self.spec.s;
        let mut z = [0.0f64; 64];
        let z: &mut [f64] = if s <= 64 { &mut z[..s] } else { &mut vec![0.0; s][..] };
        for (zj, &uj) in z.iter_mut().zip(u) {
            *zj = quantile(uj);
        }
        let mut total = 0.0;
        for i in 0..s {
            let row = &self.factor[i * s..(i + 1) * s];
            let y = self.mean[i] + row.iter().zip(z.iter()).map(|(a, z)| a * z).sum::<f64>();
            total += self.weights[i] * y.exp();
        }
        total - self.spec.strike
    }

    fn interval(&self) -> Interval {
        self.interval
    }
}

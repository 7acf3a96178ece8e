//! Simulation models `X = g(U)` with `U` uniform over `[0,1)^s`.

mod cantilever;
mod lognormal;
mod normal;
mod sum_normals;

use crate::error::{invalid, Result};
use crate::pointsets::PointSet;
use crate::Interval;

pub use cantilever::Cantilever;
pub use lognormal::{GbmSpec, LognormalSum, PathConstruction, WeightScheme};
pub use normal::{clamp_events, inv_normal_cdf, normal_cdf, normal_pdf, quantile, QUANTILE_CLAMP};
pub use sum_normals::{exact_normal_rf2, normal_rf2, SumOfNormals};

/// A map `g: [0,1)^s -> R` together with the window `[a, b]` over which its
/// output density is estimated.
pub trait Model: Send + Sync {
    fn name(&self) -> String;

    fn dim(&self) -> usize;

    fn eval(&self, u: &[f64]) -> f64;

    fn interval(&self) -> Interval;

    /// Exact density of `X`, when known.
    fn density(&self, _x: f64) -> Option<f64> {
        None
    }

    /// Exact `R(f'') = int_a^b f''(x)^2 dx`, when known.
    fn exact_rf2(&self) -> Option<f64> {
        None
    }

    /// Per-coordinate monotonicity direction (`+1` nondecreasing, `-1`
    /// nonincreasing) when `g` is monotone in every coordinate.
    fn monotone_signs(&self) -> Option<Vec<f64>> {
        None
    }

    fn has_density(&self) -> bool {
        self.density(0.5 * (self.interval().a + self.interval().b)).is_some()
    }

    /// Maps every point of `points` through `g`.
    fn outputs(&self, points: &PointSet) -> Result<Vec<f64>> {
        if points.dim() != self.dim() {
            return Err(invalid(format!(
                "model {} has dimension {} but the point set has {}",
                self.name(),
                self.dim(),
                points.dim()
            )));
        }
        Ok(points.rows().map(|u| self.eval(u)).collect())
    }

    /// Sorted outputs, ready for the density estimators.
    fn sorted_outputs(&self, points: &PointSet) -> Result<Vec<f64>> {
        let mut xs = self.outputs(points)?;
        xs.sort_unstable_by(f64::total_cmp);
        Ok(xs)
    }
}

impl<M: Model + ?Sized> Model for Box<M> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, u: &[f64]) -> f64 {
        (**self).eval(u)
    }
    fn interval(&self) -> Interval {
        (**self).interval()
    }
    fn density(&self, x: f64) -> Option<f64> {
        (**self).density(x)
    }
    fn exact_rf2(&self) -> Option<f64> {
        (**self).exact_rf2()
    }
    fn monotone_signs(&self) -> Option<Vec<f64>> {
        (**self).monotone_signs()
    }
}

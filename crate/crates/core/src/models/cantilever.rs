use super::normal::quantile;
use super::Model;
use crate::Interval;

/// Relative tip displacement `D / D0 - 1` of a cantilever beam under
/// horizontal and vertical loads, with
/// `D = 4 L^3 / (E w t) * sqrt(Y^2 / t^4 + X^2 / w^4)`.
///
/// Inputs are `(E, X, Y)`, each normal and generated by inversion from one
/// uniform coordinate, in that order.
#[derive(Clone, Debug, PartialEq)]
pub struct Cantilever {
    pub length: f64,
    pub width: f64,
    pub thickness: f64,
    pub d0: f64,
    /// (mean, standard deviation) of Young's modulus `E`.
    pub modulus: (f64, f64),
    /// (mean, standard deviation) of the horizontal load `X`.
    pub horizontal_load: (f64, f64),
    /// (mean, standard deviation) of the vertical load `Y`.
    pub vertical_load: (f64, f64),
    pub interval: Interval,
}

impl Default for Cantilever {
    fn default() -> Self {
        Cantilever {
            length: 100.0,
            width: 4.0,
            thickness: 2.0,
            d0: 2.2535,
            modulus: (2.9e7, 1.45e6),
            horizontal_load: (500.0, 100.0),
            vertical_load: (1000.0, 100.0),
            interval: Interval { a: 0.407, b: 1.515 },
        }
    }
}

impl Cantilever {
    /// Relative displacement for given physical inputs.
    pub fn displacement(&self, e: f64, x: f64, y: f64) -> f64 {
        let (w, t, l) = (self.width, self.thickness, self.length);
        let d = 4.0 * l.powi(3) / (e * w * t) * (y * y / t.powi(4) + x * x / w.powi(4)).sqrt();
        d / self.d0 - 1.0
    }
}

impl Model for Cantilever {
    fn name(&self) -> String {
        "cantilever".into()
    }

    fn dim(&self) -> usize {
        3
    }

    fn eval(&self, u: &[f64]) -> f64 {
        let e = self.modulus.0 + self.modulus.1 * quantile(u[0]);
        let x = self.horizontal_load.0 + self.horizontal_load.1 * quantile(u[1]);
        let y = self.vertical_load.0 + self.vertical_load.1 * quantile(u[2]);
        self.displacement(e, x, y)
    }

    fn interval(&self) -> Interval {
        self.interval
    }

    fn monotone_signs(&self) -> Option<Vec<f64>> {
        Some(vec![-1.0, 1.0, 1.0])
    }
}

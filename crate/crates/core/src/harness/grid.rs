use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::Interval;

/// Bandwidths per grid row.
pub const H_COUNT: usize = 6;
/// `log2 n` at which `ell_star` is reported.
pub const PAPER_LOG2_N: u32 = 19;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// `n = 2^10..2^15`, 50 replicates.
    #[default]
    Desk,
    /// `n = 2^14..2^19`, 100 replicates.
    Paper,
}

impl Preset {
    pub fn log2_n_range(self) -> (u32, u32) {
        match self {
            Preset::Desk => (10, 15),
            Preset::Paper => (14, 19),
        }
    }

    pub fn n_r(self) -> usize {
        match self {
            Preset::Desk => 50,
            Preset::Paper => 100,
        }
    }

    pub fn n_e(self) -> usize {
        1024
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Desk => "desk",
            Preset::Paper => "paper",
        })
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "desk" => Ok(Preset::Desk),
            "paper" => Ok(Preset::Paper),
            _ => Err(invalid(format!("unknown preset '{s}' (expected desk or paper)"))),
        }
    }
}

/// The `(n, h)` grid of one experiment: `h_j = 2^(-ell0 + j/2)`, `j = 0..6`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub n_values: Vec<usize>,
    pub ell0: f64,
    pub n_r: usize,
    pub n_e: usize,
    pub interval: Interval,
    pub seed: u64,
}

impl ExperimentGrid {
    pub fn new(n_values: Vec<usize>, ell0: f64, n_r: usize, n_e: usize, interval: Interval, seed: u64) -> Result<Self> {
        let grid = ExperimentGrid {
            n_values,
            ell0,
            n_r,
            n_e,
            interval,
            seed,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn from_preset(preset: Preset, ell0: f64, interval: Interval, seed: u64) -> Result<Self> {
        let (lo, hi) = preset.log2_n_range();
        Self::new(powers_of_two(lo, hi)?, ell0, preset.n_r(), preset.n_e(), interval, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(invalid("grid needs at least one n"));
        }
        if let Some(n) = self.n_values.iter().find(|n| !n.is_power_of_two() || **n < 2) {
            return Err(invalid(format!("grid n values must be powers of 2, got {n}")));
        }
        if !self.n_values.windows(2).all(|w| w[0] < w[1]) {
            return Err(invalid("grid n values must be strictly increasing"));
        }
        let twice = 2.0 * self.ell0;
        if !(twice.is_finite() && twice == twice.round()) {
            return Err(invalid(format!("2 * ell0 must be an integer, got ell0 = {}", self.ell0)));
        }
        if self.n_r < 2 {
            return Err(invalid(format!("n_r must be at least 2, got {}", self.n_r)));
        }
        if self.n_e == 0 {
            return Err(invalid("n_e must be positive"));
        }
        Interval::new(self.interval.a, self.interval.b)?;
        Ok(())
    }

    pub fn h0(&self) -> f64 {
        2f64.powf(-self.ell0)
    }

    pub fn h_values(&self) -> Vec<f64> {
        (0..H_COUNT).map(|j| 2f64.powf(-self.ell0 + j as f64 / 2.0)).collect()
    }

    pub fn log2_h_values(&self) -> Vec<f64> {
        (0..H_COUNT).map(|j| -self.ell0 + j as f64 / 2.0).collect()
    }

    pub fn cells(&self) -> usize {
        self.n_values.len() * H_COUNT
    }
}

/// `[2^lo, ..., 2^hi]`.
pub fn powers_of_two(lo: u32, hi: u32) -> Result<Vec<usize>> {
    if lo > hi || hi >= usize::BITS - 1 {
        return Err(invalid(format!("invalid log2 n range {lo}..={hi}")));
    }
    Ok((lo..=hi).map(|m| 1usize << m).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv() -> Interval {
        Interval::new(-2.0, 2.0).unwrap()
    }

    #[test]
    fn paper_grid_has_36_cells() {
        let g = ExperimentGrid::from_preset(Preset::Paper, 4.5, iv(), 1).unwrap();
        assert_eq!(g.cells(), 36);
        assert_eq!(g.n_values.first(), Some(&(1 << 14)));
        assert_eq!(g.n_values.last(), Some(&(1 << 19)));
        assert_eq!(g.n_r, 100);
        assert_eq!(g.n_e, 1024);
        let h = g.h_values();
        assert_eq!(h.len(), 6);
        assert!((h[0] - 2f64.powf(-4.5)).abs() < 1e-15);
        assert!((h[5] - 2f64.powf(-2.0)).abs() < 1e-15);
    }

    #[test]
    fn desk_grid() {
        let g = ExperimentGrid::from_preset(Preset::Desk, 8.5, iv(), 1).unwrap();
        assert_eq!(g.n_values, (10..=15).map(|m| 1usize << m).collect::<Vec<_>>());
        assert_eq!(g.n_r, 50);
    }

    #[test]
    fn validation() {
        assert!(ExperimentGrid::from_preset(Preset::Desk, 4.3, iv(), 1).is_err());
        assert!(ExperimentGrid::new(vec![1000], 4.0, 10, 10, iv(), 0).is_err());
        assert!(ExperimentGrid::new(vec![1024], 4.0, 1, 10, iv(), 0).is_err());
        assert!(ExperimentGrid::new(vec![2048, 1024], 4.0, 3, 10, iv(), 0).is_err());
        assert!(ExperimentGrid::new(vec![], 4.0, 3, 10, iv(), 0).is_err());
        assert!(ExperimentGrid::new(vec![1024], 4.0, 3, 0, iv(), 0).is_err());
        assert!(ExperimentGrid::new(vec![1024], 4.0, 3, 8, Interval { a: 1.0, b: 0.0 }, 0).is_err());
    }

    #[test]
    fn preset_parsing() {
        assert_eq!("paper".parse::<Preset>().unwrap(), Preset::Paper);
        assert_eq!("DESK".parse::<Preset>().unwrap(), Preset::Desk);
        assert!("huge".parse::<Preset>().is_err());
        assert_eq!(Preset::Paper.to_string(), "paper");
    }
}

//! Point sets over the unit hypercube.
//!
//! Four samplers are provided: independent uniforms (MC), one uniform point per
//! congruent subcube (stratified), and a base-2 Sobol' net randomized either by
//! a left matrix scramble with a digital shift (LMS) or by a nested uniform
//! scramble (NUS). Every point set is a pure function of its [`SamplerSpec`]
//! and the requested size.

mod mc;
mod scramble;
mod sobol;
mod stratified;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use mc::sample_mc;
pub use scramble::{randomize_lms, randomize_nus};
pub use sobol::{sobol_net, SobolNet, MAX_BIT_DEPTH, MAX_SOBOL_DIM};
pub use stratified::{sample_stratified, strata_per_axis};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Mc,
    #[serde(rename = "strat")]
    Stratified,
    #[serde(rename = "lms")]
    SobolLms,
    #[serde(rename = "nus")]
    SobolNus,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 4] = [
        SamplerKind::Mc,
        SamplerKind::Stratified,
        SamplerKind::SobolLms,
        SamplerKind::SobolNus,
    ];

    /// Short name used in tables and CSV output.
    pub fn label(self) -> &'static str {
        match self {
            SamplerKind::Mc => "MC",
            SamplerKind::Stratified => "Strat",
            SamplerKind::SobolLms => "LMS",
            SamplerKind::SobolNus => "NUS",
        }
    }

    pub fn is_sobol(self) -> bool {
        matches!(self, SamplerKind::SobolLms | SamplerKind::SobolNus)
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mc" => Ok(SamplerKind::Mc),
            "strat" | "stratified" => Ok(SamplerKind::Stratified),
            "lms" | "sobol-lms" => Ok(SamplerKind::SobolLms),
            "nus" | "sobol-nus" => Ok(SamplerKind::SobolNus),
            other => Err(invalid(format!("unknown sampler '{other}'"))),
        }
    }
}

/// How a point set is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub kind: SamplerKind,
    pub s: usize,
    pub seed: u64,
    /// Number of base-2 output digits of the Sobol' samplers.
    pub bit_depth: u32,
}

impl SamplerSpec {
    pub fn new(kind: SamplerKind, s: usize, seed: u64) -> Self {
        SamplerSpec {
            kind,
            s,
            seed,
            bit_depth: MAX_BIT_DEPTH,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SamplerSpec { seed, ..self }
    }

    pub fn with_bit_depth(self, bit_depth: u32) -> Self {
        SamplerSpec { bit_depth, ..self }
    }

    /// The number of points [`generate`](Self::generate) returns for a
    /// requested size `n`.
    pub fn actual_n(&self, n: usize) -> Result<usize> {
        match self.kind {
            SamplerKind::Stratified => Ok(strata_per_axis(self.s, n)?.pow(self.s as u32)),
            _ => Ok(n),
        }
    }

    /// Draws a point set of (nominal) size `n`.
    ///
    /// Sobol' samplers need `n` to be a power of two. The stratified sampler
    /// treats `n` as a target and returns `q^s` points.
    pub fn generate(&self, n: usize) -> Result<PointSet> {
        match self.kind {
            SamplerKind::Mc => sample_mc(self.s, n, self.seed),
            SamplerKind::Stratified => sample_stratified(self.s, n, self.seed),
            SamplerKind::SobolLms | SamplerKind::SobolNus => {
                if !n.is_power_of_two() {
                    return Err(invalid(format!("Sobol' point sets need n = 2^m, got {n}")));
                }
                let m = n.trailing_zeros();
                let net = sobol_net(self.s, m, self.bit_depth)?;
                if self.kind == SamplerKind::SobolLms {
                    randomize_lms(&net, self.seed)
                } else {
                    randomize_nus(&net, self.seed)
                }
            }
        }
    }
}

/// An `n x s` matrix of points in `[0,1)^s`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    points: Vec<f64>,
    n: usize,
    s: usize,
    spec: SamplerSpec,
    strata_per_axis: Option<usize>,
}

impl PointSet {
    pub(crate) fn from_parts(
        points: Vec<f64>,
        n: usize,
        spec: SamplerSpec,
        strata_per_axis: Option<usize>,
    ) -> Self {
        debug_assert_eq!(points.len(), n * spec.s);
        PointSet {
            points,
            n,
            s: spec.s,
            spec,
            strata_per_axis,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.s
    }

    pub fn spec(&self) -> &SamplerSpec {
        &self.spec
    }

    /// `q` for stratified point sets (`n = q^s`).
    pub fn strata_per_axis(&self) -> Option<usize> {
        self.strata_per_axis
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.s..(i + 1) * self.s]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.s)
    }

    /// Coordinate `j` of every point.
    pub fn coordinate(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().skip(j).step_by(self.s).copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.points
    }

    /// Writes one row per point, coordinates in shortest round-trip decimal form.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = (0..self.s).map(|j| format!("u{j}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// True when the values fall exactly one in each interval `[i 2^-m, (i+1) 2^-m)`.
pub fn one_per_dyadic_interval(values: impl IntoIterator<Item = f64>, m: u32) -> bool {
    let cells = 1usize << m;
    let mut counts = vec![0u32; cells];
    let mut total = 0usize;
    for v in values {
        if !(0.0..1.0).contains(&v) {
            return false;
        }
        let c = (v * cells as f64) as usize;
        counts[c] += 1;
        total += 1;
    }
    total == cells && counts.iter().all(|&c| c == 1)
}

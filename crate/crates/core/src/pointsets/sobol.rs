//! Base-2 Sobol' nets from Joe–Kuo direction numbers.

use std::sync::OnceLock;

use crate::error::{invalid, Error, Result};

/// Output digits of the Sobol' samplers; 31 keeps every value exact in an f64.
pub const MAX_BIT_DEPTH: u32 = 31;

/// Dimensions covered by the shipped direction-number table.
pub const MAX_SOBOL_DIM: usize = 1024;

const DIRECTION_NUMBERS: &str = include_str!("../../data/new-joe-kuo-6.1024.txt");

struct Primitive {
    degree: u32,
    coeffs: u32,
    m: Vec<u32>,
}

fn table() -> &'static [Primitive] {
    static TABLE: OnceLock<Vec<Primitive>> = OnceLock::new();
    TABLE.get_or_init(|| {
        DIRECTION_NUMBERS
            .lines()
            .skip(1)
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                let fields: Vec<u32> = line
                    .split_whitespace()
                    .map(|f| f.parse().expect("direction-number table is numeric"))
                    .collect();
                Primitive {
                    degree: fields[1],
                    coeffs: fields[2],
                    m: fields[3..].to_vec(),
                }
            })
            .collect()
    })
}

/// The 31 direction numbers `v_1..v_31` of dimension `dim` (0-based), as
/// 31-bit integers with `v_k` carrying its leading bit at digit `k`.
fn direction_numbers(dim: usize) -> [u32; MAX_BIT_DEPTH as usize] {
    const L: usize = MAX_BIT_DEPTH as usize;
    let mut v = [0u32; L];
    if dim == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1 << (L - 1 - k);
        }
        return v;
    }
    let p = &table()[dim - 1];
    let deg = p.degree as usize;
    for k in 0..deg.min(L) {
        v[k] = p.m[k] << (L - 1 - k);
    }
    for k in deg..L {
        let mut x = v[k - deg] ^ (v[k - deg] >> deg);
        for i in 1..deg {
            if (p.coeffs >> (deg - 1 - i)) & 1 == 1 {
                x ^= v[k - i];
            }
        }
        v[k] = x;
    }
    v
}

/// Unrandomized Sobol' net of `2^m` points in `s` dimensions.
///
/// Each dimension is stored as the columns of its generating matrix: column
/// `c` is the `bit_depth`-digit image of index bit `c`, most significant
/// output digit first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SobolNet {
    s: usize,
    m: u32,
    bit_depth: u32,
    columns: Vec<Vec<u32>>,
}

/// Builds the first `2^m` points of the `s`-dimensional Sobol' sequence.
pub fn sobol_net(s: usize, m: u32, bit_depth: u32) -> Result<SobolNet> {
    if s == 0 {
        return Err(invalid("Sobol' net needs s >= 1"));
    }
    if s > MAX_SOBOL_DIM {
        return Err(Error::UnsupportedDimension {
            requested: s,
            max: MAX_SOBOL_DIM,
        });
    }
    if bit_depth == 0 || bit_depth > MAX_BIT_DEPTH {
        return Err(invalid(format!("bit_depth must lie in 1..={MAX_BIT_DEPTH}")));
    }
    if m > bit_depth {
        return Err(invalid(format!("m = {m} exceeds bit_depth = {bit_depth}")));
    }
    let drop = MAX_BIT_DEPTH - bit_depth;
    let columns = (0..s)
        .map(|j| {
            direction_numbers(j)[..m as usize]
                .iter()
                .map(|v| v >> drop)
                .collect()
        })
        .collect();
    Ok(SobolNet {
        s,
        m,
        bit_depth,
        columns,
    })
}

impl SobolNet {
    pub fn dim(&self) -> usize {
        self.s
    }

    pub fn log2_n(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> usize {
        1usize << self.m
    }

    pub fn bit_depth(&self) -> u32 {
        self.bit_depth
    }

    /// Generating-matrix columns of dimension `j`.
    pub fn columns(&self, j: usize) -> &[u32] {
        &self.columns[j]
    }

    /// Integer digit vectors of every point (row-major, `n x s`) for the given
    /// per-dimension columns.
    pub(crate) fn digits_with(&self, columns: &[Vec<u32>]) -> Vec<u32> {
        let (n, s) = (self.n(), self.s);
        let mut out = vec![0u32; n * s];
        for i in 1..n {
            let parent = i & (i - 1);
            let c = i.trailing_zeros() as usize;
            for j in 0..s {
                out[i * s + j] = out[parent * s + j] ^ columns[j][c];
            }
        }
        out
    }

    pub fn digits(&self) -> Vec<u32> {
        self.digits_with(&self.columns)
    }

    /// The net's points as floats in `[0,1)`.
    pub fn points(&self) -> Vec<f64> {
        let scale = 0.5f64.powi(self.bit_depth as i32);
        self.digits().into_iter().map(|d| d as f64 * scale).collect()
    }
}

//! Composite Simpson quadrature and compensated summation helpers.

use crate::error::{invalid, Result};

/// Composite Simpson rule over `[a, b]` on `nodes` equally spaced nodes
/// (`nodes` odd, at least 3).
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, nodes: usize) -> Result<f64> {
    if !(a < b) {
        return Err(invalid(format!("quadrature needs a < b (got [{a}, {b}])")));
    }
    if nodes < 3 || nodes.is_multiple_of(2) {
        return Err(invalid(format!("Simpson's rule needs an odd node count >= 3, got {nodes}")));
    }
    let step = (b - a) / (nodes - 1) as f64;
    let values: Vec<f64> = (0..nodes)
        .map(|i| f(if i == nodes - 1 { b } else { a + i as f64 * step }))
        .collect();
    simpson_values(&values, step)
}

/// Simpson's rule applied to values already tabulated on an equispaced grid.
pub fn simpson_values(values: &[f64], step: f64) -> Result<f64> {
    let nodes = values.len();
    if nodes < 3 || nodes.is_multiple_of(2) {
        return Err(invalid(format!("Simpson's rule needs an odd node count >= 3, got {nodes}")));
    }
    let weighted = values.iter().enumerate().map(|(i, &v)| {
        let w = if i == 0 || i == nodes - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        w * v
    });
    Ok(pairwise_sum_iter(weighted) * step / 3.0)
}

/// Pairwise summation; error grows as `O(log n)` rather than `O(n)`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

fn pairwise_sum_iter(it: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = it.collect();
    pairwise_sum(&v)
}

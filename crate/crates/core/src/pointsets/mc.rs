use rand::Rng;

use super::{PointSet, SamplerKind, SamplerSpec};
use crate::error::{invalid, Result};
use crate::seed;

/// `n` independent uniform points in `[0,1)^s`.
pub fn sample_mc(s: usize, n: usize, seed: u64) -> Result<PointSet> {
    if s == 0 || n == 0 {
        return Err(invalid(format!("MC sampling needs n >= 1 and s >= 1 (n={n}, s={s})")));
    }
    let mut rng = seed::rng(seed);
    let points = (0..n * s).map(|_| rng.random::<f64>()).collect();
    Ok(PointSet::from_parts(
        points,
        n,
        SamplerSpec::new(SamplerKind::Mc, s, seed),
        None,
    ))
}

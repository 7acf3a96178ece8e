use rand::Rng;

use super::{PointSet, SamplerKind, SamplerSpec};
use crate::error::{invalid, Result};
use crate::seed;

/// Strata per axis for a target size: `q = round(target_n^(1/s))`.
pub fn strata_per_axis(s: usize, target_n: usize) -> Result<usize> {
    if s == 0 {
        return Err(invalid("stratified sampling needs s >= 1"));
    }
    let min = 1usize.checked_shl(s as u32).filter(|_| s < usize::BITS as usize);
    match min {
        Some(min) if target_n >= min => {}
        _ => {
            return Err(invalid(format!(
                "stratified sampling needs target_n >= 2^s (target_n={target_n}, s={s})"
            )))
        }
    }
    let mut q = (target_n as f64).powf(1.0 / s as f64).round() as usize;
    // Correct the floating-point root so that (q - 1/2)^s < target_n <= (q + 1/2)^s.
    let t = target_n as f64;
    while ((q as f64 + 0.5).powi(s as i32)) < t {
        q += 1;
    }
    while q > 2 && (q as f64 - 0.5).powi(s as i32) >= t {
        q -= 1;
    }
    q.checked_pow(s as u32)
        .ok_or_else(|| invalid(format!("q^s overflows for q={q}, s={s}")))?;
    Ok(q)
}

/// One uniform point in each of the `q^s` congruent subcubes of `[0,1)^s`.
///
/// Cell `i` has index digits `(i_1, ..., i_s)` in base `q`, with the first
/// coordinate most significant, and point `i` lies in that cell.
pub fn sample_stratified(s: usize, target_n: usize, seed: u64) -> Result<PointSet> {
    let q = strata_per_axis(s, target_n)?;
    let n = q.pow(s as u32);
    let mut rng = seed::rng(seed);
    let qf = q as f64;
    let mut digits = vec![0usize; s];
    let mut points = Vec::with_capacity(n * s);
    for _ in 0..n {
        for &d in &digits {
            let lo = d as f64 / qf;
            let hi = (d + 1) as f64 / qf;
            let u = (d as f64 + rng.random::<f64>()) / qf;
            points.push(u.clamp(lo, hi.next_down()));
        }
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < q {
                break;
            }
            *d = 0;
        }
    }
    Ok(PointSet::from_parts(
        points,
        n,
        SamplerSpec::new(SamplerKind::Stratified, s, seed),
        Some(q),
    ))
}

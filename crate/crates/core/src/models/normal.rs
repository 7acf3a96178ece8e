//! Standard normal distribution: density, CDF and inverse CDF.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::kernel::FRAC_1_SQRT_2PI;

/// Value returned for `u = 0` (negated for `u = 1`).
pub const QUANTILE_CLAMP: f64 = 8.2;

static CLAMP_EVENTS: AtomicU64 = AtomicU64::new(0);

/// How many times the inverse CDF was asked for `u = 0` or `u = 1`.
pub fn clamp_events() -> u64 {
    CLAMP_EVENTS.load(Ordering::Relaxed)
}

#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

// Acklam's rational approximation, relative error 1.15e-9 before refinement.
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_671_010_229_583,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.024_25;

fn tail(q: f64) -> f64 {
    (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
        / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
}

fn acklam(u: f64) -> f64 {
    if u < P_LOW {
        tail((-2.0 * u.ln()).sqrt())
    } else if u > 1.0 - P_LOW {
        -tail((-2.0 * (1.0 - u).ln()).sqrt())
    } else {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Inverse CDF for `u` in `[0, 1]`; `0` and `1` map to `-/+ QUANTILE_CLAMP`.
#[inline]
pub fn quantile(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        CLAMP_EVENTS.fetch_add(1, Ordering::Relaxed);
        return if u <= 0.0 { -QUANTILE_CLAMP } else { QUANTILE_CLAMP };
    }
    let x = acklam(u);
    // One Halley step on Phi(x) - u.
    let e = if x < 0.0 {
        0.5 * libm::erfc(-x * FRAC_1_SQRT_2) - u
    } else {
        (1.0 - u) - 0.5 * libm::erfc(x * FRAC_1_SQRT_2)
    };
    let step = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - step / (1.0 + 0.5 * x * step)
}

/// Standard normal quantile `Phi^-1(u)`.
///
/// `u` outside `[0, 1]` (or NaN) is a domain error; the endpoints are clamped
/// to `-/+ 8.2` and counted in [`clamp_events`].
pub fn inv_normal_cdf(u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("inverse normal CDF needs u in [0, 1], got {u}")));
    }
    Ok(quantile(u))
}

//! Plug-in bandwidth selection.
//!
//! The AMISE-optimal bandwidth depends on the unknown roughness `R(f'')`. It
//! is estimated by integrating the square of a derivative estimator whose own
//! bandwidth comes from `R(f^(r+2))`; the recursion is started from a normal
//! density with the sample's mean and variance.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kde::kde_derivative;
use crate::kernel::{roughness, Gaussian, Kernel};
use crate::models::Model;
use crate::pointsets::SamplerSpec;
use crate::quadrature::simpson;

/// Simpson nodes used for estimated roughness functionals over `[a, b]`.
pub const ROUGHNESS_NODES: usize = 1025;

/// One step of the plug-in recursion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PluginStage {
    /// Derivative order estimated at this stage.
    pub r: u32,
    /// Bandwidth used for the derivative estimator.
    pub h: f64,
    /// `R(f^(r+2))` the bandwidth was computed from.
    pub r_next: f64,
    /// Resulting estimate of `R(f^(r))`.
    pub r_hat: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PluginResult {
    /// Estimated `R(f'')`.
    pub rf2_hat: f64,
    /// `mu_2(k)^2 R(f'') / 4`, the AISB constant.
    pub b_hat: f64,
    /// AMISE-optimal bandwidth for the sample size used.
    pub h_star: f64,
    pub chain: Vec<PluginStage>,
    pub mean: f64,
    pub std_dev: f64,
}

/// `int_a^b (phi_{mu,sigma}^(r)(x))^2 dx` for the `N(mu, sigma^2)` density.
pub fn normal_reference_r(r: u32, mu: f64, sigma: f64, a: f64, b: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    if !(1..=6).contains(&r) {
        return Err(invalid(format!("derivative order must lie in 1..=6, got {r}")));
    }
    if !(a < b) {
        return Err(invalid(format!("invalid interval [{a}, {b}]")));
    }
    // Substitute z = (x - mu) / sigma; the integrand is negligible past |z| = 40.
    let za = ((a - mu) / sigma).max(-40.0);
    let zb = ((b - mu) / sigma).min(40.0);
    if za >= zb {
        return Ok(0.0);
    }
    let k = Gaussian;
    let integral = simpson(|z| k.deriv(r, z).powi(2), za, zb, 8001)?;
    Ok(integral / sigma.powi(2 * r as i32 + 1))
}

/// AMISE-optimal bandwidth for estimating `f^(r)`:
/// `[(2r+1) mu_0((k^(r))^2) / (mu_2(k)^2 R(f^(r+2)) n)]^(1/(2r+5))`.
pub fn stage_bandwidth<K: Kernel>(r: u32, r_next: f64, n: usize, kernel: &K) -> Result<f64> {
    if !(r_next > 0.0 && r_next.is_finite()) {
        return Err(invalid(format!("R(f^(r+2)) must be positive, got {r_next}")));
    }
    if n < 2 {
        return Err(invalid(format!("stage bandwidth needs n >= 2, got {n}")));
    }
    let num = (2 * r + 1) as f64 * kernel.deriv_sq_mass(r);
    let den = kernel.mu2().powi(2) * r_next * n as f64;
    Ok((num / den).powf(1.0 / (2 * r + 5) as f64))
}

/// `h = (Q / n)^(1/5)` with `Q = mu_0(k^2) / (mu_2(k)^2 R(f''))` and
/// `R(f'') = 4B / mu_2(k)^2`.
pub fn mc_optimal_h<K: Kernel>(b: f64, n: usize, kernel: &K) -> Result<f64> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(invalid(format!("AISB constant must be positive, got {b}")));
    }
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let mu2sq = kernel.mu2().powi(2);
    let rf2 = 4.0 * b / mu2sq;
    let q = kernel.mu0_sq() / (mu2sq * rf2);
    Ok((q / n as f64).powf(0.2))
}

/// AMISE at the optimal bandwidth, `(5/4) Q^(-1/5) mu_0(k^2) n^(-4/5)`.
pub fn optimal_amise<K: Kernel>(b: f64, n: usize, kernel: &K) -> Result<f64> {
    let h = mc_optimal_h(b, n, kernel)?;
    let q = h.powi(5) * n as f64;
    Ok(1.25 * q.powf(-0.2) * kernel.mu0_sq() * (n as f64).powf(-0.8))
}

/// Runs the plug-in recursion from derivative order `r0` (even, at least 2)
/// down to `R(f'')` over `[a, b]`.
pub fn plugin_chain<K: Kernel>(sample: &[f64], r0: u32, a: f64, b: f64, kernel: &K) -> Result<PluginResult> {
    let n = sample.len();
    if n < 100 {
        return Err(invalid(format!("plug-in selection needs n >= 100, got {n}")));
    }
    if r0 < 2 || r0 % 2 == 1 {
        return Err(invalid(format!("r0 must be even and at least 2, got {r0}")));
    }
    if !(a < b) {
        return Err(invalid(format!("invalid interval [{a}, {b}]")));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let nf = n as f64;
    let mean = sorted.iter().sum::<f64>() / nf;
    let var = sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let std_dev = var.sqrt();
    if !(std_dev > 0.0 && std_dev.is_finite()) {
        return Err(Error::DegenerateSample(format!("sample standard deviation is {std_dev}")));
    }

    let grid: Vec<f64> = (0..ROUGHNESS_NODES)
        .map(|i| a + (b - a) * i as f64 / (ROUGHNESS_NODES - 1) as f64)
        .collect();
    let mut r_next = normal_reference_r(r0 + 2, mean, std_dev, a, b)?;
    let mut chain = Vec::new();
    let mut r = r0;
    loop {
        let h = stage_bandwidth(r, r_next, n, kernel)?;
        let deriv = kde_derivative(&sorted, h, r, kernel, &grid)?;
        let r_hat = roughness(&deriv, a, b)?;
        if !(r_hat > 0.0) {
            return Err(Error::DegenerateSample(format!(
                "estimated R(f^({r})) is {r_hat}; the interval may hold no sample mass"
            )));
        }
        chain.push(PluginStage { r, h, r_next, r_hat });
        if r == 2 {
            break;
        }
        r_next = r_hat;
        r -= 2;
    }
    let rf2_hat = chain.last().map(|s| s.r_hat).unwrap_or_default();
    let b_hat = kernel.mu2().powi(2) * rf2_hat / 4.0;
    let h_star = mc_optimal_h(b_hat, n, kernel)?;
    Ok(PluginResult {
        rf2_hat,
        b_hat,
        h_star,
        chain,
        mean,
        std_dev,
    })
}

/// Plug-in estimate for a model over its interval, from a point set of size
/// `n` drawn with `spec`.
pub fn plugin_for_model<M: Model + ?Sized>(model: &M, spec: &SamplerSpec, n: usize) -> Result<PluginResult> {
    let points = spec.generate(n)?;
    let sample = model.sorted_outputs(&points)?;
    let iv = model.interval();
    plugin_chain(&sample, 2, iv.a, iv.b, &Gaussian)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{exact_normal_rf2, SumOfNormals};
    use crate::pointsets::SamplerKind;
    use std::f64::consts::PI;

    #[test]
    fn normal_reference_values() {
        let r = normal_reference_r(2, 0.0, 1.0, -2.0, 2.0).unwrap();
        assert!((r - 0.19018).abs() < 1e-4);
        assert!((r - exact_normal_rf2(2.0).unwrap()).abs() < 1e-12);
        let full = normal_reference_r(2, 0.0, 1.0, -20.0, 20.0).unwrap();
        assert!((full - 3.0 / (8.0 * PI.sqrt())).abs() < 1e-12);
        for r in 1..=6 {
            let base = normal_reference_r(r, 0.0, 1.0, -2.0, 2.0).unwrap();
            let scaled = normal_reference_r(r, 0.0, 2.0, -4.0, 4.0).unwrap();
            let factor = 2f64.powi(-(2 * r as i32 + 1));
            assert!((scaled - factor * base).abs() < 1e-12 * base, "r={r}");
            // Shifting mean and window together changes nothing.
            let shifted = normal_reference_r(r, 3.0, 1.0, 1.0, 5.0).unwrap();
            assert!((shifted - base).abs() < 1e-12 * base);
        }
        assert!(normal_reference_r(2, 0.0, 0.0, -1.0, 1.0).is_err());
        assert!(normal_reference_r(7, 0.0, 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn stage_bandwidth_scaling() {
        let k = Gaussian;
        let r4 = normal_reference_r(4, 0.0, 1.0, -2.0, 2.0).unwrap();
        let h = stage_bandwidth(2, r4, 1 << 16, &k).unwrap();
        assert!(h > 0.0 && h < 1.0);
        let h2 = stage_bandwidth(2, r4, 1 << 17, &k).unwrap();
        assert!((h2 / h - 2f64.powf(-1.0 / 9.0)).abs() < 1e-14);
        // r = 0 is the AMISE-optimal estimator bandwidth.
        let rf2 = exact_normal_rf2(2.0).unwrap();
        let h0 = stage_bandwidth(0, rf2, 5000, &k).unwrap();
        let hm = mc_optimal_h(rf2 / 4.0, 5000, &k).unwrap();
        assert!((h0 - hm).abs() < 1e-14);
        assert!(stage_bandwidth(2, 0.0, 100, &k).is_err());
    }

    #[test]
    fn mc_optimal_bandwidth() {
        let k = Gaussian;
        let b = exact_normal_rf2(2.0).unwrap() / 4.0;
        let h = mc_optimal_h(b, 1 << 19, &k).unwrap();
        assert!((-h.log2() - 3.69).abs() < 0.005, "{}", -h.log2());
        let h32 = mc_optimal_h(b, 32 << 19, &k).unwrap();
        assert!((h32 / h - 0.5).abs() < 1e-14);
        // AMISE = AIV + AISB at the optimum.
        let n = 1 << 14;
        let h = mc_optimal_h(b, n, &k).unwrap();
        let amise = k.mu0_sq() / (n as f64 * h) + b * h.powi(4);
        assert!((optimal_amise(b, n, &k).unwrap() - amise).abs() < 1e-15);
        assert!(mc_optimal_h(0.0, 10, &k).is_err());
    }

    #[test]
    fn plugin_rejects_degenerate_input() {
        let k = Gaussian;
        assert!(matches!(
            plugin_chain(&[1.0; 200], 2, -2.0, 2.0, &k),
            Err(Error::DegenerateSample(_))
        ));
        assert!(plugin_chain(&[1.0; 50], 2, -2.0, 2.0, &k).is_err());
        let xs: Vec<f64> = (0..200).map(|i| i as f64 / 100.0).collect();
        assert!(plugin_chain(&xs, 3, -2.0, 2.0, &k).is_err());
    }

    #[test]
    fn plugin_is_order_invariant() {
        let m = SumOfNormals::equal(1).unwrap();
        let ps = SamplerSpec::new(SamplerKind::Mc, 1, 4).generate(2000).unwrap();
        let xs = m.outputs(&ps).unwrap();
        let mut rev = xs.clone();
        rev.reverse();
        let a = plugin_chain(&xs, 2, -2.0, 2.0, &Gaussian).unwrap();
        let b = plugin_chain(&rev, 2, -2.0, 2.0, &Gaussian).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn plugin_on_rqmc_normal_sample() {
        let m = SumOfNormals::equal(1).unwrap();
        let spec = SamplerSpec::new(SamplerKind::SobolLms, 1, 1);
        let res = plugin_for_model(&m, &spec, 1 << 16).unwrap();
        let exact_b = exact_normal_rf2(2.0).unwrap() / 4.0;
        assert!((0.035..=0.050).contains(&res.b_hat), "{}", res.b_hat);
        assert!(res.b_hat < exact_b);
        assert_eq!(res.chain.len(), 1);
        assert!(res.h_star < 4.0);
    }

    #[test]
    fn deeper_chain_runs() {
        let m = SumOfNormals::equal(1).unwrap();
        let spec = SamplerSpec::new(SamplerKind::SobolNus, 1, 1);
        let ps = spec.generate(1 << 14).unwrap();
        let xs = m.sorted_outputs(&ps).unwrap();
        let res = plugin_chain(&xs, 4, -2.0, 2.0, &Gaussian).unwrap();
        assert_eq!(res.chain.iter().map(|s| s.r).collect::<Vec<_>>(), vec![4, 2]);
        assert_eq!(res.chain[1].r_next, res.chain[0].r_hat);
    }
}

//! Closed-form asymptotic variances, bounds and rates.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernel::Kernel;
use crate::pointsets::strata_per_axis;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundMethod {
    McAiv,
    NusIvBound,
    StratIvBound,
    StratMiseBound,
    KhRate,
}

/// Inputs echoed next to a bound so a report is self-describing.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n: Option<usize>,
    pub h: Option<f64>,
    pub s: Option<usize>,
    pub t: Option<u32>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub k0: Option<f64>,
    pub mu0: Option<f64>,
    pub p0: Option<f64>,
    pub rf: Option<f64>,
    pub rf2: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub method: BoundMethod,
    pub value: f64,
    pub inputs: BoundInputs,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Constants of the stratified MISE bound at `h = kappa n^(-(s+1)/(6s))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratMise {
    pub kappa: f64,
    /// Exponent of `n` in the bandwidth, `(s+1)/(6s)`.
    pub h_exponent: f64,
    pub k_const: f64,
    pub nu: f64,
    pub inputs: BoundInputs,
}

impl StratMise {
    pub fn h_opt(&self, n: usize) -> f64 {
        self.kappa * (n as f64).powf(-self.h_exponent)
    }

    /// `K n^(-nu)`.
    pub fn mise_bound(&self, n: usize) -> f64 {
        self.k_const * (n as f64).powf(-self.nu)
    }
}

/// Rates implied by the Koksma-Hlawka route for a smooth `s`-dimensional model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KhRates {
    pub s: usize,
    pub beta: f64,
    pub delta: f64,
    pub mise_exponent: f64,
    pub h_exponent: f64,
}

fn check_nh(n: usize, h: f64) -> Result<()> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(format!("bandwidth must be positive, got {h}")));
    }
    Ok(())
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a < b && a.is_finite() && b.is_finite()) {
        return Err(invalid(format!("invalid interval [{a}, {b}]")));
    }
    Ok(())
}

/// Monte Carlo integrated variance `p0 mu_0(k^2) / (n h)`, minus `R(f) / n`
/// when `rf` is given.
pub fn mc_aiv<K: Kernel>(n: usize, h: f64, p0: f64, rf: Option<f64>, kernel: &K) -> Result<BoundReport> {
    check_nh(n, h)?;
    if !(p0 > 0.0 && p0 <= 1.0) {
        return Err(invalid(format!("p0 must lie in (0, 1], got {p0}")));
    }
    let nf = n as f64;
    let mut value = p0 * kernel.mu0_sq() / (nf * h);
    if let Some(r) = rf {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(invalid(format!("R(f) must be non-negative, got {r}")));
        }
        value = (value - r / nf).max(0.0);
    }
    Ok(BoundReport {
        method: BoundMethod::McAiv,
        value,
        inputs: BoundInputs {
            n: Some(n),
            h: Some(h),
            mu0: Some(kernel.mu0_sq()),
            p0: Some(p0),
            rf,
            ..Default::default()
        },
        warnings: Vec::new(),
    })
}

/// Stratified IV bound `(b-a) s k(0)^2 h^(-2) n^(-(s+1)/s)` for `n = q^s`.
pub fn strat_iv_bound<K: Kernel>(n: usize, h: f64, s: usize, a: f64, b: f64, kernel: &K) -> Result<BoundReport> {
    check_nh(n, h)?;
    check_interval(a, b)?;
    if s == 0 {
        return Err(invalid("s must be at least 1"));
    }
    let perfect = n == 1
        || (s < 64 && n >= 1 << s && {
            let q = strata_per_axis(s, n)?;
            (q as u128).checked_pow(s as u32) == Some(n as u128)
        });
    if !perfect {
        return Err(invalid(format!("n = {n} is not a perfect {s}-th power")));
    }
    let k0 = kernel.at_zero();
    let sf = s as f64;
    let value = (b - a) * sf * k0 * k0 * h.powi(-2) * (n as f64).powf(-(sf + 1.0) / sf);
    Ok(BoundReport {
        method: BoundMethod::StratIvBound,
        value,
        inputs: BoundInputs {
            n: Some(n),
            h: Some(h),
            s: Some(s),
            a: Some(a),
            b: Some(b),
            k0: Some(k0),
            ..Default::default()
        },
        warnings: Vec::new(),
    })
}

/// Bandwidth constant, rate and leading constant of the stratified MISE bound.
pub fn strat_mise_bound<K: Kernel>(s: usize, a: f64, b: f64, rf2: f64, kernel: &K) -> Result<StratMise> {
    check_interval(a, b)?;
    if s == 0 {
        return Err(invalid("s must be at least 1"));
    }
    if !(rf2 > 0.0 && rf2.is_finite()) {
        return Err(invalid(format!("R(f'') must be positive, got {rf2}")));
    }
    let sf = s as f64;
    let k0 = kernel.at_zero();
    let c = (b - a) * sf * k0 * k0;
    let mu2sq = kernel.mu2().powi(2);
    let kappa = (c / (mu2sq * rf2 / 2.0)).powf(1.0 / 6.0);
    let k_const = c * kappa.powi(-2) + mu2sq * rf2 * kappa.powi(4) / 4.0;
    Ok(StratMise {
        kappa,
        h_exponent: (sf + 1.0) / (6.0 * sf),
        k_const,
        nu: 2.0 / 3.0 * (sf + 1.0) / sf,
        inputs: BoundInputs {
            s: Some(s),
            a: Some(a),
            b: Some(b),
            k0: Some(k0),
            rf2: Some(rf2),
            ..Default::default()
        },
    })
}

/// IV bound `2^t 3^s mu_0(k^2) / (n h)` for a scrambled `(t, m, s)`-net.
/// An unknown `t` is taken as 0 and flagged in the report.
pub fn nus_iv_bound<K: Kernel>(n: usize, h: f64, t: Option<u32>, s: usize, kernel: &K) -> Result<BoundReport> {
    check_nh(n, h)?;
    if s == 0 {
        return Err(invalid("s must be at least 1"));
    }
    let mut warnings = Vec::new();
    let t_val = t.unwrap_or_else(|| {
        warnings.push("net quality parameter t unknown; using t = 0".to_string());
        0
    });
    let value = 2f64.powi(t_val as i32) * 3f64.powi(s as i32) * kernel.mu0_sq() / (n as f64 * h);
    Ok(BoundReport {
        method: BoundMethod::NusIvBound,
        value,
        inputs: BoundInputs {
            n: Some(n),
            h: Some(h),
            s: Some(s),
            t: Some(t_val),
            mu0: Some(kernel.mu0_sq()),
            ..Default::default()
        },
        warnings,
    })
}

pub fn kh_rates(s: usize) -> Result<KhRates> {
    if s == 0 {
        return Err(invalid("s must be at least 1"));
    }
    let sf = s as f64;
    Ok(KhRates {
        s,
        beta: 2.0,
        delta: 2.0 * sf,
        mise_exponent: 4.0 / (2.0 + sf),
        h_exponent: 1.0 / (2.0 + sf),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Gaussian;
    use crate::models::normal_cdf;
    use proptest::prelude::*;

    const K: Gaussian = Gaussian;

    #[test]
    fn mc_aiv_examples() {
        let h = 2f64.powf(-4.5);
        let v = mc_aiv(1 << 14, h, 1.0, None, &K).unwrap();
        assert!((v.value - 3.896e-4).abs() < 5e-7, "{}", v.value);
        assert!((v.value - K.mu0_sq() * 2f64.powf(-9.5)).abs() < 1e-18);
        let v2 = mc_aiv(1 << 15, h, 1.0, None, &K).unwrap();
        assert!((v2.value * 2.0 - v.value).abs() < 1e-18);
        let p0 = 2.0 * normal_cdf(2.0) - 1.0;
        assert!((p0 - 0.9545).abs() < 1e-4);
        let corrected = mc_aiv(1 << 14, h, p0, Some(0.25), &K).unwrap();
        assert!((corrected.value - (p0 * v.value - 0.25 / 16384.0)).abs() < 1e-18);
        assert!(mc_aiv(0, h, 1.0, None, &K).is_err());
        assert!(mc_aiv(10, h, 1.5, None, &K).is_err());
        assert!(mc_aiv(10, -h, 1.0, None, &K).is_err());
    }

    #[test]
    fn strat_iv_examples() {
        let r = strat_iv_bound(100, 0.1, 1, -2.0, 2.0, &K).unwrap();
        let c = 4.0 * K.at_zero().powi(2);
        assert!((c - 2.0 / std::f64::consts::PI).abs() < 1e-12);
        assert!((r.value - c * 100.0 * 1e-4).abs() < 1e-15);
        let a = strat_iv_bound(1 << 5, 0.1, 5, 0.0, 1.0, &K).unwrap().value;
        let b = strat_iv_bound(1 << 10, 0.1, 5, 0.0, 1.0, &K).unwrap().value;
        assert!(((a / b).log2() - 5.0 * 1.2).abs() < 1e-12);
        assert!(strat_iv_bound(10, 0.1, 2, 0.0, 1.0, &K).is_err());
        assert!(strat_iv_bound(16, 0.1, 2, 1.0, 0.0, &K).is_err());
        assert!(strat_iv_bound(1, 0.1, 2, 0.0, 1.0, &K).is_ok());
    }

    #[test]
    fn strat_mise_examples() {
        assert!((strat_mise_bound(1, -2.0, 2.0, 0.19, &K).unwrap().nu - 4.0 / 3.0).abs() < 1e-15);
        assert!((strat_mise_bound(5, -2.0, 2.0, 0.19, &K).unwrap().nu - 0.8).abs() < 1e-15);
        assert!((strat_mise_bound(2, -2.0, 2.0, 0.19018, &K).unwrap().nu - 1.0).abs() < 1e-15);
        assert!(strat_mise_bound(2, -2.0, 2.0, 0.0, &K).is_err());
    }

    #[test]
    fn nus_examples() {
        let h = 0.05;
        let nus = nus_iv_bound(1000, h, Some(0), 1, &K).unwrap();
        let mc = mc_aiv(1000, h, 1.0, None, &K).unwrap();
        assert!((nus.value - 3.0 * mc.value).abs() < 1e-15);
        assert!(nus.warnings.is_empty());
        let v = nus_iv_bound(1 << 16, 1.0 / 16.0, None, 3, &K).unwrap();
        assert!((v.value - 1.859e-3).abs() < 1e-6);
        assert_eq!(v.inputs.t, Some(0));
        assert_eq!(v.warnings.len(), 1);
        assert!((nus_iv_bound(64, 0.1, Some(2), 1, &K).unwrap().value / nus_iv_bound(64, 0.1, Some(0), 1, &K).unwrap().value - 4.0).abs() < 1e-12);
        // With h ~ n^(-1/5) the bound plus AISB falls like n^(-4/5).
        let f = |n: usize| {
            let h = (n as f64).powf(-0.2);
            nus_iv_bound(n, h, Some(0), 1, &K).unwrap().value + 0.05 * h.powi(4)
        };
        assert!(((f(1 << 10) / f(1 << 20)).log2() / 10.0 - 0.8).abs() < 1e-12);
    }

    #[test]
    fn kh_examples() {
        assert!((kh_rates(1).unwrap().mise_exponent - 4.0 / 3.0).abs() < 1e-15);
        assert!((kh_rates(3).unwrap().mise_exponent - 0.8).abs() < 1e-15);
        let r = kh_rates(12).unwrap();
        assert!((r.mise_exponent - 2.0 / 7.0).abs() < 1e-15);
        assert_eq!((r.beta, r.delta), (2.0, 24.0));
        assert!((r.h_exponent - 1.0 / 14.0).abs() < 1e-15);
        assert!(kh_rates(0).is_err());
    }

    #[test]
    fn report_serializes() {
        let r = nus_iv_bound(64, 0.1, None, 2, &K).unwrap();
        let js = serde_json::to_string(&r).unwrap();
        assert!(js.contains("NUS_IV_BOUND"));
        let back: BoundReport = serde_json::from_str(&js).unwrap();
        assert_eq!(back, r);
    }

    proptest! {
        #[test]
        fn bounds_decrease_in_n_and_h(q in 2usize..40, s in 1usize..4, h in 0.01f64..1.0) {
            let n = q.pow(s as u32);
            let n2 = (q + 1).pow(s as u32);
            let strat = |n, h| strat_iv_bound(n, h, s, -2.0, 2.0, &K).unwrap().value;
            prop_assert!(strat(n2, h) < strat(n, h));
            prop_assert!(strat(n, 1.1 * h) < strat(n, h));
            let mc = |n, h| mc_aiv(n, h, 0.9, None, &K).unwrap().value;
            prop_assert!(mc(n2, h) < mc(n, h));
            prop_assert!(mc(n, 1.1 * h) < mc(n, h));
            let nus = |n, h| nus_iv_bound(n, h, Some(1), s, &K).unwrap().value;
            prop_assert!(nus(n2, h) < nus(n, h));
            prop_assert!(nus(n, 1.1 * h) < nus(n, h));
            let sm = strat_mise_bound(s, -2.0, 2.0, 0.19, &K).unwrap();
            prop_assert!(sm.mise_bound(n2) < sm.mise_bound(n));
        }

        #[test]
        fn strat_mise_identity(q in 2usize..60, s in 1usize..4, rf2 in 0.01f64..100.0, w in 0.5f64..10.0) {
            let n = q.pow(s as u32);
            let sm = strat_mise_bound(s, 0.0, w, rf2, &K).unwrap();
            let h = sm.h_opt(n);
            let iv = strat_iv_bound(n, h, s, 0.0, w, &K).unwrap().value;
            let aisb = K.mu2().powi(2) * rf2 * h.powi(4) / 4.0;
            let kn = sm.mise_bound(n);
            prop_assert!(((iv + aisb) - kn).abs() <= 1e-12 * kn);
            // kappa minimises K.
            let k_at = |kappa: f64| (w * s as f64 * K.at_zero().powi(2)) * kappa.powi(-2) + rf2 * kappa.powi(4) / 4.0;
            prop_assert!(k_at(sm.kappa * 1.01) > sm.k_const && k_at(sm.kappa * 0.99) > sm.k_const);
        }
    }
}

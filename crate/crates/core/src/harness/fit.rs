use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

use super::grid::PAPER_LOG2_N;
use super::surface::{IvSurface, SurfaceCell};

/// Exponent of `h` in the AISB, `B h^ALPHA`.
pub const ALPHA: f64 = 4.0;

/// Least-squares coefficients and coefficient of determination.
#[derive(Clone, Debug, PartialEq)]
pub struct OlsFit {
    pub coef: Vec<f64>,
    pub r2: f64,
}

/// Ordinary least squares of `y` on the columns of `x` (row-major rows).
pub fn ols(rows: &[Vec<f64>], y: &[f64]) -> Result<OlsFit> {
    let m = rows.len();
    if m == 0 || m != y.len() {
        return Err(invalid("regression needs matching, non-empty design and response"));
    }
    let p = rows[0].len();
    if m < p || rows.iter().any(|r| r.len() != p) {
        return Err(invalid(format!("regression needs at least {p} complete rows")));
    }
    let x = DMatrix::from_fn(m, p, |i, j| rows[i][j]);
    let yv = DVector::from_column_slice(y);
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > smax * 1e-10) {
        return Err(invalid("singular regression design"));
    }
    let beta = svd.solve(&yv, 0.0).map_err(|e| invalid(format!("least squares failed: {e}")))?;
    let resid = &yv - &x * &beta;
    let mean = yv.mean();
    let ss_res = resid.norm_squared();
    let ss_tot: f64 = yv.iter().map(|v| (v - mean).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
    Ok(OlsFit {
        coef: beta.iter().copied().collect(),
        r2,
    })
}

/// `IV ~ C n^(-beta) h^(-delta)` together with the AISB constant `B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IvFit {
    #[serde(rename = "C")]
    pub c: f64,
    pub beta: f64,
    pub delta: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub cells_used: usize,
}

/// Regresses `log2 IV` on `(1, log2 n, log2 h)` over cells with positive IV.
pub fn fit_iv_model(surface: &IvSurface, b: f64) -> Result<IvFit> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(invalid(format!("AISB constant must be positive, got {b}")));
    }
    let cells: Vec<_> = surface.cells.iter().filter(|c| c.est.iv > 0.0).collect();
    if cells.len() < 6 {
        return Err(invalid(format!("need at least 6 cells with positive IV, got {}", cells.len())));
    }
    let varies = |f: fn(&SurfaceCell) -> f64| cells.iter().any(|c| f(c) != f(cells[0]));
    if !varies(|c| c.log2n) || !varies(|c| c.log2h) {
        return Err(invalid("singular regression design: need at least two n and two h values"));
    }
    let rows: Vec<Vec<f64>> = cells.iter().map(|c| vec![1.0, c.log2n, c.log2h]).collect();
    let y: Vec<f64> = cells.iter().map(|c| c.est.iv.log2()).collect();
    let fit = ols(&rows, &y)?;
    Ok(IvFit {
        c: 2f64.powf(fit.coef[0]),
        beta: -fit.coef[1],
        delta: -fit.coef[2],
        r2: fit.r2,
        b,
        cells_used: cells.len(),
    })
}

/// Optimal-bandwidth model `h_* = kappa n^(-gamma)` and `MISE ~ K n^(-nu)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalBandwidth {
    pub kappa_star: f64,
    pub gamma_star: f64,
    #[serde(rename = "K_star")]
    pub k_star: f64,
    pub nu_star: f64,
    /// `-log2 h_*(2^19)`.
    pub ell_star: f64,
}

impl OptimalBandwidth {
    pub fn h_star(&self, n: f64) -> f64 {
        self.kappa_star * n.powf(-self.gamma_star)
    }

    /// `-log2 h_*(2^m)`.
    pub fn ell_at(&self, log2_n: f64) -> f64 {
        -self.kappa_star.log2() + self.gamma_star * log2_n
    }

    pub fn mise(&self, n: f64) -> f64 {
        self.k_star * n.powf(-self.nu_star)
    }
}

pub fn derive_optimal(fit: &IvFit) -> Result<OptimalBandwidth> {
    let IvFit { c, beta, delta, b, .. } = *fit;
    if !(b > 0.0 && c > 0.0 && delta > 0.0 && beta.is_finite()) {
        return Err(invalid(format!("fit does not admit an optimum (C={c}, delta={delta}, B={b})")));
    }
    let kappa_star = (c * delta / (b * ALPHA)).powf(1.0 / (ALPHA + delta));
    let gamma_star = beta / (ALPHA + delta);
    let k_star = c * kappa_star.powf(-delta) + b * kappa_star.powf(ALPHA);
    let nu_star = ALPHA * beta / (ALPHA + delta);
    let ell_star = -(kappa_star * 2f64.powf(-(PAPER_LOG2_N as f64) * gamma_star)).log2();
    Ok(OptimalBandwidth {
        kappa_star,
        gamma_star,
        k_star,
        nu_star,
        ell_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::CellEstimate;
    use crate::pointsets::SamplerKind;
    use crate::Interval;
    use proptest::prelude::*;

    fn synthetic(f: impl Fn(f64, f64) -> f64, log2n: &[f64], log2h: &[f64]) -> IvSurface {
        let mut cells = Vec::new();
        for &ln in log2n {
            for &lh in log2h {
                let (n, h) = (2f64.powf(ln), 2f64.powf(lh));
                cells.push(SurfaceCell {
                    n: n as usize,
                    actual_n: n as usize,
                    log2n: ln,
                    h,
                    log2h: lh,
                    reps: 2,
                    est: CellEstimate {
                        iv: f(n, h),
                        iv_se: None,
                        mise: None,
                        mise_se: None,
                        isb: None,
                    },
                });
            }
        }
        IvSurface {
            model: "synthetic".into(),
            sampler: SamplerKind::Mc,
            s: 1,
            interval: Interval::new(0.0, 1.0).unwrap(),
            n_e: 1,
            cells,
        }
    }

    const LN: [f64; 6] = [14.0, 15.0, 16.0, 17.0, 18.0, 19.0];
    const LH: [f64; 6] = [-4.5, -4.0, -3.5, -3.0, -2.5, -2.0];

    #[test]
    fn recovers_exact_power_law() {
        let s = synthetic(|n, h| 0.3 * n.powf(-1.5) * h.powf(-2.5), &LN, &LH);
        let fit = fit_iv_model(&s, 0.05).unwrap();
        assert!((fit.c - 0.3).abs() < 1e-9);
        assert!((fit.beta - 1.5).abs() < 1e-9);
        assert!((fit.delta - 2.5).abs() < 1e-9);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert_eq!(fit.cells_used, 36);
    }

    #[test]
    fn singular_designs_are_rejected() {
        let one_n = synthetic(|n, h| 1.0 / (n * h), &[14.0], &LH);
        assert!(fit_iv_model(&one_n, 0.05).is_err());
        let one_h = synthetic(|n, h| 1.0 / (n * h), &LN, &[-3.0]);
        assert!(fit_iv_model(&one_h, 0.05).is_err());
        let zeros = synthetic(|_, _| 0.0, &LN, &LH);
        assert!(fit_iv_model(&zeros, 0.05).is_err());
        let ok = synthetic(|n, h| 1.0 / (n * h), &LN, &LH);
        assert!(fit_iv_model(&ok, 0.0).is_err());
        assert!(ols(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn derive_optimal_examples() {
        let mk = |c, beta, delta, b| IvFit {
            c,
            beta,
            delta,
            r2: 1.0,
            b,
            cells_used: 36,
        };
        let o = derive_optimal(&mk(0.265, 1.038, 1.134, 0.0418)).unwrap();
        assert!((o.kappa_star - 1.121).abs() < 2e-3, "{}", o.kappa_star);
        assert!((o.gamma_star - 0.202).abs() < 5e-4);
        assert!((o.nu_star - 0.808).abs() < 1e-3);
        assert!((o.ell_star - 3.675).abs() < 5e-3, "{}", o.ell_star);
        let o = derive_optimal(&mk(0.109, 0.991, 1.168, 107.4)).unwrap();
        assert!((o.kappa_star - 0.208).abs() < 1e-3);
        assert!((o.gamma_star - 0.192).abs() < 5e-4);
        let rf2 = crate::models::exact_normal_rf2(2.0).unwrap();
        let o = derive_optimal(&mk(crate::kernel::Kernel::mu0_sq(&crate::Gaussian), 1.0, 1.0, rf2 / 4.0)).unwrap();
        assert!((o.gamma_star - 0.2).abs() < 1e-15);
        assert!((o.nu_star - 0.8).abs() < 1e-15);
        // Same optimum as the closed-form MC bandwidth.
        let h = crate::bandwidth::mc_optimal_h(rf2 / 4.0, 1 << 19, &crate::Gaussian).unwrap();
        assert!((o.h_star((1u64 << 19) as f64) - h).abs() < 1e-12);
        assert!((o.ell_at(19.0) - o.ell_star).abs() < 1e-12);
        assert!(derive_optimal(&mk(0.1, 1.0, 1.0, 0.0)).is_err());
    }

    proptest! {
        #[test]
        fn optimal_identities(c in 1e-4f64..10.0, beta in 0.5f64..3.0, delta in 0.5f64..6.0, b in 1e-6f64..200.0) {
            let fit = IvFit { c, beta, delta, r2: 1.0, b, cells_used: 36 };
            let o = derive_optimal(&fit).unwrap();
            prop_assert_eq!(o.gamma_star, beta / (4.0 + delta));
            prop_assert_eq!(o.nu_star, 4.0 * beta / (4.0 + delta));
            prop_assert!((o.nu_star - 4.0 * o.gamma_star).abs() <= 1e-15 * o.nu_star.max(1.0));
            // h_* minimises C n^-beta h^-delta + B h^4 at every n.
            for n in [1e3f64, 1e6] {
                let h = o.h_star(n);
                let mise = |h: f64| c * n.powf(-beta) * h.powf(-delta) + b * h.powi(4);
                prop_assert!(mise(h * 1.01) >= mise(h) && mise(h * 0.99) >= mise(h));
                prop_assert!((mise(h) - o.mise(n)).abs() <= 1e-10 * o.mise(n));
            }
        }

        #[test]
        fn fit_recovers_random_power_laws(c in 1e-3f64..10.0, beta in 0.5f64..3.0, delta in 0.5f64..5.0) {
            let s = synthetic(|n, h| c * n.powf(-beta) * h.powf(-delta), &LN, &LH);
            let fit = fit_iv_model(&s, 1.0).unwrap();
            prop_assert!((fit.c / c - 1.0).abs() < 1e-9);
            prop_assert!((fit.beta - beta).abs() < 1e-9);
            prop_assert!((fit.delta - delta).abs() < 1e-9);
        }
    }
}

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::models::Model;
use crate::pointsets::SamplerSpec;
use crate::seed::derive;

use super::fit::{derive_optimal, fit_iv_model, ols, IvFit, OptimalBandwidth};
use super::grid::{ExperimentGrid, PAPER_LOG2_N};
use super::surface::{estimate_cells, estimate_surface, evaluation_points, IvSurface, SurfaceCell};

const STREAM_SECOND: u64 = 0x7365_636f;

/// Quantity regressed on `log2 n` in the second stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageBasis {
    Mise,
    /// No exact density: the IV is regressed instead and `e19` comes from
    /// the first-stage model `K_* 2^(-19 nu_*)`.
    Iv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondStage {
    pub basis: StageBasis,
    #[serde(rename = "K_tilde")]
    pub k_tilde: f64,
    pub nu_tilde: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    /// `log2` of the largest `n`.
    pub m_max: f64,
    /// `-log2` of the measured error at the largest `n`.
    pub e_max: f64,
    /// `-log2 MISE(2^19)`.
    pub e19: f64,
    pub e19_extrapolated: bool,
    pub cells: Vec<SurfaceCell>,
}

impl SecondStage {
    /// `e19`, or `eM` for the largest `n = 2^M` when that is not `2^19`.
    pub fn e_label(&self) -> String {
        format!("e{}", self.m_max.round() as i64)
    }
}

/// Out-of-sample check at `h = kappa n^(-gamma)` with fresh replicates.
/// With a known density the MISE is regressed on `log2 n`; otherwise the IV
/// is, and `e19` comes from the first-stage model.
pub fn second_stage<M: Model + ?Sized>(
    model: &M,
    spec: &SamplerSpec,
    optimal: &OptimalBandwidth,
    grid: &ExperimentGrid,
) -> Result<SecondStage> {
    grid.validate()?;
    let seed = derive(grid.seed, STREAM_SECOND);
    let xs = evaluation_points(grid.interval, grid.n_e, seed);
    let mut log2n = Vec::with_capacity(grid.n_values.len());
    let mut hs = Vec::with_capacity(grid.n_values.len());
    for &n in &grid.n_values {
        let actual = spec.actual_n(n)? as f64;
        log2n.push(actual.log2());
        hs.push(optimal.h_star(actual));
    }
    let est = estimate_cells(model, spec, &grid.n_values, &hs, 1, grid.n_r, &xs, grid.interval, seed)?;
    let mut cells = Vec::with_capacity(est.len());
    for ((&n, row), (&ln, &h)) in grid.n_values.iter().zip(est).zip(log2n.iter().zip(&hs)) {
        let e = row.into_iter().next().expect("one rung per n");
        cells.push(SurfaceCell {
            n,
            actual_n: spec.actual_n(n)?,
            log2n: ln,
            h,
            log2h: h.log2(),
            reps: grid.n_r,
            est: e,
        });
    }
    let basis = if cells.iter().all(|c| c.est.mise.is_some()) {
        StageBasis::Mise
    } else {
        StageBasis::Iv
    };
    let value = |c: &SurfaceCell| match basis {
        StageBasis::Mise => c.est.mise.unwrap_or(0.0),
        StageBasis::Iv => c.est.iv,
    };
    let rows: Vec<Vec<f64>> = cells.iter().map(|c| vec![1.0, c.log2n]).collect();
    let y: Vec<f64> = cells.iter().map(|c| value(c).log2()).collect();
    let fit = ols(&rows, &y)?;
    let k_tilde = 2f64.powf(fit.coef[0]);
    let nu_tilde = -fit.coef[1];
    let last = cells.last().expect("non-empty grid");
    let m_max = last.log2n;
    let e_max = -value(last).log2();
    let at_19 = (m_max - PAPER_LOG2_N as f64).abs() < 1e-9;
    let (e19, e19_extrapolated) = match (basis, at_19) {
        (StageBasis::Mise, true) => (e_max, false),
        (StageBasis::Mise, false) => (PAPER_LOG2_N as f64 * nu_tilde - k_tilde.log2(), true),
        (StageBasis::Iv, _) => (-optimal.mise(2f64.powi(PAPER_LOG2_N as i32)).log2(), true),
    };
    Ok(SecondStage {
        basis,
        k_tilde,
        nu_tilde,
        r2: fit.r2,
        m_max,
        e_max,
        e19,
        e19_extrapolated,
        cells,
    })
}

/// Surface, regression, optimal bandwidth and second stage for one sampler.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub surface: IvSurface,
    pub fit: IvFit,
    pub optimal: OptimalBandwidth,
    pub second: SecondStage,
}

pub fn run_experiment<M: Model + ?Sized>(
    model: &M,
    spec: &SamplerSpec,
    grid: &ExperimentGrid,
    b: f64,
) -> Result<Experiment> {
    let surface = estimate_surface(model, spec, grid)?;
    let fit = fit_iv_model(&surface, b)?;
    let optimal = derive_optimal(&fit)?;
    let second = second_stage(model, spec, &optimal, grid)?;
    Ok(Experiment {
        surface,
        fit,
        optimal,
        second,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{exact_normal_rf2, Cantilever, SumOfNormals};
    use crate::pointsets::SamplerKind;
    use crate::Interval;

    #[test]
    fn second_stage_on_normal_model() {
        let m = SumOfNormals::equal(1).unwrap();
        let spec = SamplerSpec::new(SamplerKind::Mc, 1, 0);
        let b = exact_normal_rf2(2.0).unwrap() / 4.0;
        let opt = derive_optimal(&IvFit {
            c: 0.27,
            beta: 1.0,
            delta: 1.1,
            r2: 1.0,
            b,
            cells_used: 36,
        })
        .unwrap();
        let grid = ExperimentGrid::new(vec![1 << 10, 1 << 11, 1 << 12], 4.5, 8, 128, m.interval(), 3).unwrap();
        let st = second_stage(&m, &spec, &opt, &grid).unwrap();
        assert_eq!(st.basis, StageBasis::Mise);
        assert!(st.e19_extrapolated);
        assert_eq!(st.e_label(), "e12");
        assert!((st.e19 - (19.0 * st.nu_tilde - st.k_tilde.log2())).abs() < 1e-12);
        assert!(st.nu_tilde > 0.4 && st.nu_tilde < 1.2, "{}", st.nu_tilde);
        assert_eq!(st, second_stage(&m, &spec, &opt, &grid).unwrap());
        for c in &st.cells {
            assert!((c.h - opt.h_star(c.n as f64)).abs() < 1e-15);
        }
    }

    #[test]
    fn second_stage_without_density_uses_iv() {
        let m = Cantilever::default();
        let spec = SamplerSpec::new(SamplerKind::SobolLms, 3, 0);
        let opt = derive_optimal(&IvFit {
            c: 1.8e-4,
            beta: 1.943,
            delta: 3.922,
            r2: 1.0,
            b: 107.1,
            cells_used: 36,
        })
        .unwrap();
        let grid = ExperimentGrid::new(vec![1 << 9, 1 << 10], 7.0, 4, 64, m.interval(), 1).unwrap();
        let st = second_stage(&m, &spec, &opt, &grid).unwrap();
        assert_eq!(st.basis, StageBasis::Iv);
        assert!((st.e19 + opt.mise(2f64.powi(19)).log2()).abs() < 1e-12);
    }

    #[test]
    fn full_pipeline_runs() {
        let m = SumOfNormals::equal(1).unwrap();
        let spec = SamplerSpec::new(SamplerKind::SobolNus, 1, 0);
        let grid = ExperimentGrid::new(vec![1 << 8, 1 << 9, 1 << 10], 6.5, 6, 128, Interval::new(-2.0, 2.0).unwrap(), 2).unwrap();
        let ex = run_experiment(&m, &spec, &grid, 0.04).unwrap();
        assert_eq!(ex.surface.cells.len(), 18);
        assert!(ex.fit.beta > 1.2, "{:?}", ex.fit);
        assert!((ex.optimal.gamma_star - ex.fit.beta / (4.0 + ex.fit.delta)).abs() < 1e-15);
    }
}

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kde::gaussian_ladder;
use crate::models::Model;
use crate::pointsets::{SamplerKind, SamplerSpec};
use crate::quadrature::pairwise_sum;
use crate::seed::{derive, derive_path, rng};
use crate::Interval;

use super::grid::{ExperimentGrid, H_COUNT};

pub(crate) const STREAM_EVAL: u64 = 0x6576_616c;
pub(crate) const STREAM_SURFACE: u64 = 0x7375_7266;

/// Statistics of one `(n, h)` cell over `n_r` replicates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellEstimate {
    pub iv: f64,
    /// Jackknife standard error over replicates; needs `n_r >= 3`.
    pub iv_se: Option<f64>,
    pub mise: Option<f64>,
    pub mise_se: Option<f64>,
    /// `MISE - IV (n_r - 1) / n_r`, the squared error of the replicate mean.
    pub isb: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCell {
    /// Requested sample size.
    pub n: usize,
    /// Sample size actually drawn (differs for stratification).
    pub actual_n: usize,
    pub log2n: f64,
    pub h: f64,
    pub log2h: f64,
    pub reps: usize,
    #[serde(flatten)]
    pub est: CellEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IvSurface {
    pub model: String,
    pub sampler: SamplerKind,
    pub s: usize,
    pub interval: Interval,
    pub n_e: usize,
    pub cells: Vec<SurfaceCell>,
}

impl IvSurface {
    /// Cell for the `i`-th `n` value and `j`-th bandwidth of a grid surface.
    pub fn cell(&self, i: usize, j: usize) -> Option<&SurfaceCell> {
        self.cells.get(i * H_COUNT + j).filter(|_| j < H_COUNT)
    }

    pub fn has_mise(&self) -> bool {
        self.cells.iter().all(|c| c.est.mise.is_some())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        super::output::write_surface_csv(std::slice::from_ref(self), out)
    }
}

/// Evaluation points `a + (b - a)(e + V_e) / n_e` with `V_e ~ U(0,1)`.
pub(crate) fn evaluation_points(interval: Interval, n_e: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(derive(seed, STREAM_EVAL));
    let w = interval.width();
    (0..n_e)
        .map(|e| {
            let v: f64 = r.random();
            interval.a + w * (e as f64 + v) / n_e as f64
        })
        .collect()
}

/// Estimates IV (and MISE when the model density is known) for each `n` and
/// a geometric ladder of `rungs` bandwidths `h0 2^(j/2)`. One sorted sample
/// per replicate is shared by all bandwidths. Replicate `r` at sample size
/// `n` uses seed `derive_path(seed, [n, r])`.
///
/// Returns `[n index][rung]` estimates in input order.
#[allow(clippy::too_many_arguments)]
pub fn estimate_cells<M: Model + ?Sized>(
    model: &M,
    spec: &SamplerSpec,
    n_values: &[usize],
    h0: &[f64],
    rungs: usize,
    n_r: usize,
    xs: &[f64],
    interval: Interval,
    seed: u64,
) -> Result<Vec<Vec<CellEstimate>>> {
    if n_r < 2 {
        return Err(invalid(format!("n_r must be at least 2, got {n_r}")));
    }
    if h0.len() != n_values.len() {
        return Err(invalid("one base bandwidth per n is required"));
    }
    if model.dim() != spec.s {
        return Err(invalid(format!(
            "model '{}' has dimension {} but the sampler has s = {}",
            model.name(),
            model.dim(),
            spec.s
        )));
    }
    let fx: Option<Vec<f64>> = xs.iter().map(|&x| model.density(x)).collect();
    let width = interval.width();
    let mut out = Vec::with_capacity(n_values.len());
    for (&n, &h) in n_values.iter().zip(h0) {
        let cell_seed = derive_path(seed, &[n as u64]);
        let reps: Vec<Vec<Vec<f64>>> = (0..n_r)
            .into_par_iter()
            .map(|r| {
                let points = spec.with_seed(derive(cell_seed, r as u64)).generate(n)?;
                let sample = model.sorted_outputs(&points)?;
                gaussian_ladder(&sample, h, rungs, xs)
            })
            .collect::<Result<_>>()?;
        let row = (0..rungs)
            .map(|j| {
                let values: Vec<&[f64]> = reps.iter().map(|r| r[j].as_slice()).collect();
                cell_statistics(&values, fx.as_deref(), width)
            })
            .collect();
        out.push(row);
    }
    Ok(out)
}

/// IV/MISE statistics from replicate curves `values[r][e]`.
pub(crate) fn cell_statistics(values: &[&[f64]], fx: Option<&[f64]>, width: f64) -> CellEstimate {
    let n_r = values.len();
    let n_e = values[0].len();
    let nrf = n_r as f64;
    let mut s2 = vec![0.0; n_e];
    // Squared deviations from the per-point replicate mean, by replicate.
    let mut dev = vec![vec![0.0; n_e]; n_r];
    let mut col = vec![0.0; n_r];
    for e in 0..n_e {
        // Shift by the first replicate so identical replicates give exact zeros.
        let base = values[0][e];
        for (c, v) in col.iter_mut().zip(values) {
            *c = v[e] - base;
        }
        let mean = pairwise_sum(&col) / nrf;
        for (r, c) in col.iter_mut().enumerate() {
            let d = (*c - mean).powi(2);
            dev[r][e] = d;
            *c = d;
        }
        s2[e] = pairwise_sum(&col);
    }
    let total = pairwise_sum(&s2);
    let iv = width * total / (n_e as f64 * (nrf - 1.0));
    let iv_se = (n_r >= 3).then(|| {
        let loo: Vec<f64> = dev
            .iter()
            .map(|d| {
                let dr = pairwise_sum(d);
                width * (total - nrf / (nrf - 1.0) * dr) / (n_e as f64 * (nrf - 2.0))
            })
            .collect();
        jackknife_se(&loo)
    });

    let (mise, mise_se, isb) = match fx {
        Some(fx) => {
            let err: Vec<f64> = values
                .iter()
                .map(|v| {
                    let sq: Vec<f64> = v.iter().zip(fx).map(|(a, b)| (a - b).powi(2)).collect();
                    pairwise_sum(&sq)
                })
                .collect();
            let err_total = pairwise_sum(&err);
            let mise = width * err_total / (n_e as f64 * nrf);
            let loo: Vec<f64> = err
                .iter()
                .map(|e| width * (err_total - e) / (n_e as f64 * (nrf - 1.0)))
                .collect();
            let isb = mise - iv * (nrf - 1.0) / nrf;
            (Some(mise), Some(jackknife_se(&loo)), Some(isb))
        }
        None => (None, None, None),
    };
    CellEstimate {
        iv,
        iv_se,
        mise,
        mise_se,
        isb,
    }
}

/// `sqrt((m - 1)/m * sum (theta_i - mean)^2)` over leave-one-out values.
pub(crate) fn jackknife_se(loo: &[f64]) -> f64 {
    let m = loo.len() as f64;
    let mean = pairwise_sum(loo) / m;
    let sq: Vec<f64> = loo.iter().map(|t| (t - mean).powi(2)).collect();
    ((m - 1.0) / m * pairwise_sum(&sq)).sqrt()
}

/// IV (and MISE, ISB when the density is known) over the 36-cell-style grid.
pub fn estimate_surface<M: Model + ?Sized>(model: &M, spec: &SamplerSpec, grid: &ExperimentGrid) -> Result<IvSurface> {
    grid.validate()?;
    let xs = evaluation_points(grid.interval, grid.n_e, grid.seed);
    let h0 = vec![grid.h0(); grid.n_values.len()];
    let seed = derive(grid.seed, STREAM_SURFACE);
    let est = estimate_cells(model, spec, &grid.n_values, &h0, H_COUNT, grid.n_r, &xs, grid.interval, seed)?;
    let hs = grid.h_values();
    let log2h = grid.log2_h_values();
    let mut cells = Vec::with_capacity(grid.cells());
    for (&n, row) in grid.n_values.iter().zip(est) {
        let actual_n = spec.actual_n(n)?;
        for (j, e) in row.into_iter().enumerate() {
            cells.push(SurfaceCell {
                n,
                actual_n,
                log2n: (actual_n as f64).log2(),
                h: hs[j],
                log2h: log2h[j],
                reps: grid.n_r,
                est: e,
            });
        }
    }
    Ok(IvSurface {
        model: model.name(),
        sampler: spec.kind,
        s: spec.s,
        interval: grid.interval,
        n_e: grid.n_e,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::SumOfNormals;

    struct Constant;

    impl Model for Constant {
        fn name(&self) -> String {
            "constant".into()
        }
        fn dim(&self) -> usize {
            2
        }
        fn eval(&self, _u: &[f64]) -> f64 {
            0.25
        }
        fn interval(&self) -> Interval {
            Interval::new(-1.0, 1.0).unwrap()
        }
    }

    fn small_grid(seed: u64) -> ExperimentGrid {
        ExperimentGrid::new(vec![256, 512], 4.0, 4, 64, Interval::new(-2.0, 2.0).unwrap(), seed).unwrap()
    }

    #[test]
    fn constant_model_has_zero_iv() {
        for kind in SamplerKind::ALL {
            let spec = SamplerSpec::new(kind, 2, 0);
            let g = ExperimentGrid::new(vec![256], 3.0, 5, 32, Constant.interval(), 3).unwrap();
            let s = estimate_surface(&Constant, &spec, &g).unwrap();
            assert!(s.cells.iter().all(|c| c.est.iv == 0.0 && c.est.iv_se == Some(0.0)), "{kind}");
            assert!(!s.has_mise());
        }
    }

    #[test]
    fn surface_is_deterministic_and_seed_sensitive() {
        let m = SumOfNormals::equal(1).unwrap();
        let spec = SamplerSpec::new(SamplerKind::SobolNus, 1, 0);
        let a = estimate_surface(&m, &spec, &small_grid(9)).unwrap();
        let b = estimate_surface(&m, &spec, &small_grid(9)).unwrap();
        assert_eq!(a, b);
        let c = estimate_surface(&m, &spec, &small_grid(10)).unwrap();
        assert_ne!(a.cells[0].est.iv, c.cells[0].est.iv);
        assert_eq!(a.cells.len(), 12);
        assert!(a.has_mise());
        for cell in &a.cells {
            let e = &cell.est;
            assert!(e.iv >= 0.0);
            let mise = e.mise.unwrap();
            assert!(mise >= e.iv * 3.0 / 4.0 - 1e-15);
            assert!(e.isb.unwrap() >= -1e-15);
        }
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let m = SumOfNormals::equal(2).unwrap();
        let spec = SamplerSpec::new(SamplerKind::Mc, 2, 0);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_surface(&m, &spec, &small_grid(4)).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn rejects_bad_replicate_count() {
        let m = SumOfNormals::equal(1).unwrap();
        let spec = SamplerSpec::new(SamplerKind::Mc, 1, 0);
        let xs = [0.0, 0.5];
        let iv = Interval::new(-2.0, 2.0).unwrap();
        assert!(estimate_cells(&m, &spec, &[64], &[0.1], 2, 1, &xs, iv, 0).is_err());
        assert!(estimate_cells(&m, &SamplerSpec::new(SamplerKind::Mc, 2, 0), &[64], &[0.1], 2, 3, &xs, iv, 0).is_err());
    }

    #[test]
    fn statistics_match_direct_formulas() {
        let vals = [vec![1.0, 2.0, 0.5], vec![1.5, 2.5, 0.0], vec![0.5, 1.0, 1.0], vec![1.2, 2.2, 0.3]];
        let refs: Vec<&[f64]> = vals.iter().map(|v| v.as_slice()).collect();
        let fx = [1.0, 2.0, 0.5];
        let w = 3.0;
        let est = cell_statistics(&refs, Some(&fx), w);
        let nr = 4.0;
        let mut iv = 0.0;
        let mut mise = 0.0;
        for e in 0..3 {
            let mean = vals.iter().map(|v| v[e]).sum::<f64>() / nr;
            iv += vals.iter().map(|v| (v[e] - mean).powi(2)).sum::<f64>() / (nr - 1.0);
            mise += vals.iter().map(|v| (v[e] - fx[e]).powi(2)).sum::<f64>() / nr;
        }
        iv *= w / 3.0;
        mise *= w / 3.0;
        assert!((est.iv - iv).abs() < 1e-14);
        assert!((est.mise.unwrap() - mise).abs() < 1e-14);
        // Leave-one-out IV by brute force.
        let loo: Vec<f64> = (0..4)
            .map(|k| {
                let sub: Vec<&[f64]> = refs.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, v)| *v).collect();
                cell_statistics(&sub, None, w).iv
            })
            .collect();
        assert!((est.iv_se.unwrap() - jackknife_se(&loo)).abs() < 1e-14);
        let bias: f64 = (0..3)
            .map(|e| (vals.iter().map(|v| v[e]).sum::<f64>() / nr - fx[e]).powi(2))
            .sum::<f64>()
            * w
            / 3.0;
        assert!((est.isb.unwrap() - bias).abs() < 1e-14);
    }

    #[test]
    fn evaluation_points_are_stratified() {
        let iv = Interval::new(-2.0, 2.0).unwrap();
        let xs = evaluation_points(iv, 1024, 5);
        for (e, x) in xs.iter().enumerate() {
            let cell = ((x + 2.0) / 4.0 * 1024.0).floor() as usize;
            assert_eq!(cell, e);
        }
        assert_eq!(xs, evaluation_points(iv, 1024, 5));
    }
}

use serde::{Deserialize, Serialize};

use crate::bandwidth::{mc_optimal_h, plugin_for_model};
use crate::error::{invalid, Result};
use crate::kernel::Gaussian;
use crate::models::Model;
use crate::pointsets::{SamplerKind, SamplerSpec};
use crate::seed::derive;

use super::fit::{derive_optimal, fit_iv_model, IvFit};
use super::grid::{H_COUNT, PAPER_LOG2_N};
use super::surface::{estimate_cells, evaluation_points, IvSurface, SurfaceCell};

const STREAM_PILOT: u64 = 0x7069_6c6f;

/// Largest multiple of 1/2 not above `x`.
pub fn floor_half(x: f64) -> f64 {
    (2.0 * x).floor() / 2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PilotConfig {
    /// Sample sizes of the pilot runs.
    pub n_values: Vec<usize>,
    pub n_r: usize,
    pub n_e: usize,
    /// `ell0` brackets the estimated optimum at `n = 2^target_log2_n`.
    pub target_log2_n: u32,
    /// AISB constant; estimated by plug-in with LMS at `2^16` when absent.
    pub b: Option<f64>,
    /// Explicit `ell0`; skips the pilot runs.
    pub ell0_override: Option<f64>,
    pub seed: u64,
}

impl Default for PilotConfig {
    fn default() -> Self {
        PilotConfig {
            n_values: (12..=15).map(|m| 1usize << m).collect(),
            n_r: 16,
            n_e: 256,
            target_log2_n: PAPER_LOG2_N,
            b: None,
            ell0_override: None,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PilotResult {
    pub ell0: f64,
    /// Estimated `-log2 h_*` at the target size.
    pub ell_star: Option<f64>,
    pub b: Option<f64>,
    pub fit: Option<IvFit>,
    pub overridden: bool,
}

/// Rungs of the wide pilot ladder, spaced by `2^(1/2)`.
const WIDE_RUNGS: usize = 15;

/// Picks the grid anchor `ell0` from pilot runs.
///
/// A wide bandwidth ladder around the Monte Carlo optimum is run at small
/// `n`; the six consecutive bandwidths closest to the estimated MISE
/// minimum at the largest pilot size feed an IV regression, whose optimal
/// bandwidth at the target size gives `ell0 = floor_half(ell_*) + 1`.
pub fn pilot_ell0<M: Model + ?Sized>(model: &M, spec: &SamplerSpec, cfg: &PilotConfig) -> Result<PilotResult> {
    if let Some(ell0) = cfg.ell0_override {
        if (2.0 * ell0).fract() != 0.0 || !ell0.is_finite() {
            return Err(invalid(format!("2 * ell0 must be an integer, got {ell0}")));
        }
        return Ok(PilotResult {
            ell0,
            ell_star: None,
            b: cfg.b,
            fit: None,
            overridden: true,
        });
    }
    if cfg.n_values.len() < 2 {
        return Err(invalid("pilot needs at least two sample sizes"));
    }
    let b = match cfg.b {
        Some(b) => b,
        None => {
            let lms = SamplerSpec::new(SamplerKind::SobolLms, spec.s, derive(cfg.seed, 1));
            plugin_for_model(model, &lms, 1 << 16)?.b_hat
        }
    };
    let target = 2f64.powi(cfg.target_log2_n as i32);
    let ell_mc = -mc_optimal_h(b, target as usize, &Gaussian)?.log2();
    // Ladder from ell_mc + 6 down to ell_mc - 1 in half steps.
    let ell_top = floor_half(ell_mc) + 6.0;
    let h0 = 2f64.powf(-ell_top);
    let interval = model.interval();
    let seed = derive(cfg.seed, STREAM_PILOT);
    let xs = evaluation_points(interval, cfg.n_e, seed);
    let h0s = vec![h0; cfg.n_values.len()];
    let est = estimate_cells(model, spec, &cfg.n_values, &h0s, WIDE_RUNGS, cfg.n_r, &xs, interval, seed)?;

    // Estimated MISE minimum at the largest pilot size.
    let last = est.last().expect("at least two sizes");
    let proxy = |j: usize| last[j].iv + b * (h0 * 2f64.powf(j as f64 / 2.0)).powi(4);
    let j_min = (0..WIDE_RUNGS)
        .min_by(|&i, &j| proxy(i).total_cmp(&proxy(j)))
        .expect("non-empty ladder");
    // Six rungs around the minimum, two above it where possible.
    let lo = (j_min + 2).saturating_sub(H_COUNT - 1).min(WIDE_RUNGS - H_COUNT);
    let mut cells = Vec::new();
    for (&n, row) in cfg.n_values.iter().zip(&est) {
        let actual_n = spec.actual_n(n)?;
        for (j, e) in row.iter().enumerate().skip(lo).take(H_COUNT) {
            let h = h0 * 2f64.powf(j as f64 / 2.0);
            cells.push(SurfaceCell {
                n,
                actual_n,
                log2n: (actual_n as f64).log2(),
                h,
                log2h: h.log2(),
                reps: cfg.n_r,
                est: e.clone(),
            });
        }
    }
    let surface = IvSurface {
        model: model.name(),
        sampler: spec.kind,
        s: spec.s,
        interval,
        n_e: cfg.n_e,
        cells,
    };
    let fit = fit_iv_model(&surface, b)?;
    let opt = derive_optimal(&fit)?;
    let ell_star = opt.ell_at(cfg.target_log2_n as f64);
    Ok(PilotResult {
        ell0: floor_half(ell_star) + 1.0,
        ell_star: Some(ell_star),
        b: Some(b),
        fit: Some(fit),
        overridden: false,
    })
}

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::pointsets::SamplerKind;

use super::stage::{Experiment, StageBasis};
use super::surface::IvSurface;

pub const SURFACE_CSV_HEADER: &str = "sampler,s,log2n,log2h,iv,mise,isb,reps";

/// Writes surfaces as CSV rows under [`SURFACE_CSV_HEADER`]; `mise` and
/// `isb` are empty when the density is unknown.
pub fn write_surface_csv<W: Write>(surfaces: &[IvSurface], mut out: W) -> Result<()> {
    writeln!(out, "{SURFACE_CSV_HEADER}")?;
    for s in surfaces {
        for c in &s.cells {
            let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.sampler,
                s.s,
                c.log2n,
                c.log2h,
                c.est.iv,
                opt(c.est.mise),
                opt(c.est.isb),
                c.reps
            )?;
        }
    }
    Ok(())
}

/// One column of a results table, in machine-readable form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub model: String,
    pub sampler: SamplerKind,
    pub s: usize,
    pub ell0: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub beta: f64,
    pub delta: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub kappa_star: f64,
    pub gamma_star: f64,
    #[serde(rename = "K_star")]
    pub k_star: f64,
    pub nu_star: f64,
    pub ell_star: f64,
    #[serde(rename = "K_tilde")]
    pub k_tilde: f64,
    pub nu_tilde: f64,
    pub second_stage_basis: StageBasis,
    pub e19: f64,
    pub e19_extrapolated: bool,
    /// `eM` label and value at the largest `n = 2^M` of the second stage.
    pub e_label: String,
    pub e_max: f64,
}

impl FitSummary {
    pub fn new(ex: &Experiment, ell0: f64) -> Self {
        FitSummary {
            model: ex.surface.model.clone(),
            sampler: ex.surface.sampler,
            s: ex.surface.s,
            ell0,
            c: ex.fit.c,
            beta: ex.fit.beta,
            delta: ex.fit.delta,
            r2: ex.fit.r2,
            b: ex.fit.b,
            kappa_star: ex.optimal.kappa_star,
            gamma_star: ex.optimal.gamma_star,
            k_star: ex.optimal.k_star,
            nu_star: ex.optimal.nu_star,
            ell_star: ex.optimal.ell_star,
            k_tilde: ex.second.k_tilde,
            nu_tilde: ex.second.nu_tilde,
            second_stage_basis: ex.second.basis,
            e19: ex.second.e19,
            e19_extrapolated: ex.second.e19_extrapolated,
            e_label: ex.second.e_label(),
            e_max: ex.second.e_max,
        }
    }

    /// Rows of a human-readable table: `(label, formatted value)`.
    pub fn table_rows(&self) -> Vec<(String, String)> {
        let e19_label = if self.e19_extrapolated { "e19 (extrapolated)" } else { "e19" };
        let mut rows = vec![
            ("ell0".to_string(), format!("{:.1}", self.ell0)),
            ("C".to_string(), fmt_num(self.c)),
            ("beta".to_string(), format!("{:.3}", self.beta)),
            ("delta".to_string(), format!("{:.3}", self.delta)),
            ("R2".to_string(), format!("{:.3}", self.r2)),
            ("B".to_string(), fmt_num(self.b)),
            ("kappa*".to_string(), format!("{:.3}", self.kappa_star)),
            ("gamma*".to_string(), format!("{:.3}", self.gamma_star)),
            ("ell*".to_string(), format!("{:.3}", self.ell_star)),
            ("K*".to_string(), fmt_num(self.k_star)),
            ("nu*".to_string(), format!("{:.3}", self.nu_star)),
            ("nu~".to_string(), format!("{:.3}", self.nu_tilde)),
        ];
        if self.e19_extrapolated && self.e_label != "e19" {
            rows.push((self.e_label.clone(), format!("{:.2}", self.e_max)));
        }
        rows.push((e19_label.to_string(), format!("{:.2}", self.e19)));
        rows
    }
}

fn fmt_num(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{CellEstimate, SurfaceCell};
    use crate::Interval;

    #[test]
    fn csv_layout() {
        let cell = |mise| SurfaceCell {
            n: 1024,
            actual_n: 1024,
            log2n: 10.0,
            h: 0.25,
            log2h: -2.0,
            reps: 7,
            est: CellEstimate {
                iv: 0.5,
                iv_se: None,
                mise,
                mise_se: None,
                isb: mise.map(|m: f64| m - 0.25),
            },
        };
        let s = IvSurface {
            model: "m".into(),
            sampler: SamplerKind::SobolNus,
            s: 2,
            interval: Interval::new(0.0, 1.0).unwrap(),
            n_e: 4,
            cells: vec![cell(Some(0.75)), cell(None)],
        };
        let mut buf = Vec::new();
        write_surface_csv(&[s], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], SURFACE_CSV_HEADER);
        assert_eq!(lines[1], "NUS,2,10,-2,0.5,0.75,0.5,7");
        assert_eq!(lines[2], "NUS,2,10,-2,0.5,,,7");
    }
}

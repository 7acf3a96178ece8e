use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rqmc_kde::harness::{ExperimentGrid, Preset};
use rqmc_kde::models::{Cantilever, GbmSpec, LognormalSum, PathConstruction, SumOfNormals, WeightScheme};
use rqmc_kde::{Interval, Model, SamplerKind};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Ell0 {
    Value(f64),
    Auto(AutoTag),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl Default for Ell0 {
    fn default() -> Self {
        Ell0::Auto(AutoTag::Auto)
    }
}

impl std::str::FromStr for Ell0 {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Ell0::default());
        }
        let v: f64 = s.parse().map_err(|_| format!("ell0 must be a number or 'auto', got '{s}'"))?;
        if !v.is_finite() || (2.0 * v).fract() != 0.0 {
            return Err(format!("2 * ell0 must be an integer, got {v}"));
        }
        Ok(Ell0::Value(v))
    }
}

/// Everything needed to reproduce one `run`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathConstruction>,
    pub samplers: Vec<SamplerKind>,
    pub preset: Preset,
    pub ell0: Ell0,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_min: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nr: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ne: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    /// AISB constant; estimated by plug-in when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: "normal-sum".into(),
            s: None,
            weights: None,
            path: None,
            samplers: vec![SamplerKind::Mc],
            preset: Preset::Desk,
            ell0: Ell0::default(),
            n_min: None,
            n_max: None,
            nr: None,
            ne: None,
            interval: None,
            b: None,
            seed: 1,
            threads: None,
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| anyhow::anyhow!("invalid run config: {e}"))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn build_model(&self) -> Result<Box<dyn Model>> {
        build_model(&self.model, self.s, self.weights.as_deref(), self.path, self.interval)
    }

    pub fn log2_range(&self) -> Result<(u32, u32)> {
        let (lo, hi) = self.preset.log2_n_range();
        let lo = self.n_min.unwrap_or(lo);
        let hi = self.n_max.unwrap_or(hi);
        if lo > hi || hi > 30 {
            bail!("invalid log2 n range {lo}..={hi}");
        }
        Ok((lo, hi))
    }

    pub fn grid(&self, ell0: f64, interval: Interval) -> Result<ExperimentGrid> {
        let (lo, hi) = self.log2_range()?;
        let grid = ExperimentGrid::new(
            (lo..=hi).map(|m| 1usize << m).collect(),
            ell0,
            self.nr.unwrap_or(self.preset.n_r()),
            self.ne.unwrap_or(self.preset.n_e()),
            interval,
            self.seed,
        )?;
        Ok(grid)
    }
}

pub fn build_model(
    name: &str,
    s: Option<usize>,
    weights: Option<&str>,
    path: Option<PathConstruction>,
    interval: Option<[f64; 2]>,
) -> Result<Box<dyn Model>> {
    let interval = interval.map(|[a, b]| Interval::new(a, b)).transpose()?;
    let model: Box<dyn Model> = match name {
        "normal-sum" | "sum-normals" | "normal" => {
            let s = s.unwrap_or(1);
            let mut m = match weights.unwrap_or("equal") {
                "equal" => SumOfNormals::equal(s)?,
                "geometric" => SumOfNormals::geometric(s)?,
                list => {
                    let w = parse_list(list)?;
                    if w.len() != s {
                        bail!("expected {s} weights, got {}", w.len());
                    }
                    SumOfNormals::new(w)?
                }
            };
            if let Some(iv) = interval {
                m = m.with_interval(iv);
            }
            Box::new(m)
        }
        "cantilever" => {
            if s.is_some_and(|s| s != 3) {
                bail!("the cantilever model has s = 3");
            }
            let mut m = Cantilever::default();
            if let Some(iv) = interval {
                m.interval = iv;
            }
            Box::new(m)
        }
        "option" | "asian-option" => {
            let mut spec = GbmSpec::default();
            if let Some(s) = s {
                spec.s = s;
            }
            spec.weights = match weights.unwrap_or("average") {
                "average" => WeightScheme::Average,
                "declining" => WeightScheme::Declining,
                list => WeightScheme::Explicit(parse_list(list)?),
            };
            if let Some(p) = path {
                spec.path = p;
            }
            let mut m = LognormalSum::new(spec)?;
            if let Some(iv) = interval {
                m = m.with_interval(iv);
            }
            Box::new(m)
        }
        other => bail!("unknown model '{other}' (expected normal-sum, cantilever or option)"),
    };
    Ok(model)
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("invalid weight '{t}'")))
        .collect()
}

pub fn parse_path(s: &str) -> std::result::Result<PathConstruction, String> {
    match s {
        "pca" => Ok(PathConstruction::Pca),
        "bridge" | "brownian-bridge" => Ok(PathConstruction::BrownianBridge),
        "sequential" => Ok(PathConstruction::Sequential),
        _ => Err(format!("unknown path construction '{s}' (expected pca, bridge or sequential)")),
    }
}

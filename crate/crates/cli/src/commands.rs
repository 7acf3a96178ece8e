use std::fs;
use std::io::{BufWriter, Write};

use anyhow::{bail, Context, Result};
use rqmc_kde::bandwidth::{plugin_chain, plugin_for_model};
use rqmc_kde::harness::{pilot_ell0, run_experiment, write_surface_csv, FitSummary, PilotConfig};
use rqmc_kde::kde::kde_evaluate;
use rqmc_kde::pointsets::MAX_SOBOL_DIM;
use rqmc_kde::seed::derive;
use rqmc_kde::theory::{kh_rates, mc_aiv, nus_iv_bound, strat_iv_bound, strat_mise_bound};
use rqmc_kde::{Gaussian, Model, SamplerKind, SamplerSpec};

use crate::config::{build_model, Ell0, RunConfig};
use crate::{BoundKind, BoundsArgs, DensityArgs, ModelArgs, RunArgs};

pub const DENSITY_POINTS: usize = 512;

fn interval_arg(v: &Option<Vec<f64>>) -> Option<[f64; 2]> {
    v.as_ref().map(|v| [v[0], v[1]])
}

fn apply_overrides(cfg: &mut RunConfig, args: &RunArgs) {
    let m: &ModelArgs = &args.model;
    if let Some(v) = &m.model {
        cfg.model = v.clone();
    }
    if m.s.is_some() {
        cfg.s = m.s;
    }
    if m.weights.is_some() {
        cfg.weights = m.weights.clone();
    }
    if m.path.is_some() {
        cfg.path = m.path;
    }
    if m.interval.is_some() {
        cfg.interval = interval_arg(&m.interval);
    }
    if !args.sampler.is_empty() {
        cfg.samplers = args.sampler.clone();
    }
    if let Some(p) = args.preset {
        cfg.preset = p;
    }
    if let Some(e) = args.ell0 {
        cfg.ell0 = e;
    }
    macro_rules! over {
        ($($f:ident),*) => {$(if args.$f.is_some() { cfg.$f = args.$f; })*};
    }
    over!(n_min, n_max, nr, ne, b, threads);
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.out = o.clone();
    }
}

/// Plug-in estimate of `B` with a linear-scrambled Sobol' sample of `2^16`.
fn estimate_b(model: &dyn Model, seed: u64) -> Result<f64> {
    let kind = if model.dim() <= MAX_SOBOL_DIM {
        SamplerKind::SobolLms
    } else {
        SamplerKind::Mc
    };
    let spec = SamplerSpec::new(kind, model.dim(), derive(seed, 0xb));
    Ok(plugin_for_model(model, &spec, 1 << 16).context("plug-in estimate of B")?.b_hat)
}

pub fn run(args: RunArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    apply_overrides(&mut cfg, &args);
    if cfg.samplers.is_empty() {
        bail!("no sampler selected");
    }
    if let Some(t) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let model = cfg.build_model()?;
    let interval = model.interval();
    cfg.log2_range()?;
    let b = match cfg.b {
        Some(b) => b,
        None => estimate_b(model.as_ref(), cfg.seed)?,
    };
    eprintln!("model {} (s = {}), B = {b:.6}", model.name(), model.dim());

    let mut summaries = Vec::new();
    let mut surfaces = Vec::new();
    for &kind in &cfg.samplers {
        let spec = SamplerSpec::new(kind, model.dim(), cfg.seed);
        let ell0 = match cfg.ell0 {
            Ell0::Value(v) => v,
            Ell0::Auto(_) => {
                let pilot = PilotConfig {
                    b: Some(b),
                    seed: cfg.seed,
                    ..Default::default()
                };
                let r = pilot_ell0(model.as_ref(), &spec, &pilot).with_context(|| format!("pilot runs for {kind}"))?;
                eprintln!("{kind}: pilot ell0 = {}", r.ell0);
                r.ell0
            }
        };
        let grid = cfg.grid(ell0, interval)?;
        eprintln!("{kind}: {} cells, n_r = {}", grid.cells(), grid.n_r);
        let ex = run_experiment(model.as_ref(), &spec, &grid, b).with_context(|| format!("experiment for {kind}"))?;
        summaries.push(FitSummary::new(&ex, ell0));
        surfaces.push(ex.surface);
    }

    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let surface_path = cfg.out.join("surface.csv");
    let mut w = BufWriter::new(fs::File::create(&surface_path).with_context(|| format!("creating {}", surface_path.display()))?);
    write_surface_csv(&surfaces, &mut w)?;
    w.flush()?;
    let fit_path = cfg.out.join("fit.json");
    fs::write(&fit_path, serde_json::to_string_pretty(&summaries)? + "\n")
        .with_context(|| format!("writing {}", fit_path.display()))?;
    fs::write(cfg.out.join("run-config.toml"), cfg.to_toml()?).context("writing run-config.toml")?;

    print_summary(&summaries);
    Ok(())
}

fn print_summary(summaries: &[FitSummary]) {
    let rows: Vec<Vec<(String, String)>> = summaries.iter().map(|s| s.table_rows()).collect();
    let labels: Vec<String> = rows
        .iter()
        .flat_map(|r| r.iter().map(|(l, _)| l.clone()))
        .fold(Vec::new(), |mut acc, l| {
            if !acc.contains(&l) {
                acc.push(l);
            }
            acc
        });
    let lw = labels.iter().map(|l| l.len()).max().unwrap_or(0);
    print!("{:lw$}", "");
    for s in summaries {
        print!(" | {:>10}", format!("{} s={}", s.sampler, s.s));
    }
    println!();
    for l in &labels {
        print!("{l:lw$}");
        for r in &rows {
            let v = r.iter().find(|(k, _)| k == l).map(|(_, v)| v.as_str()).unwrap_or("");
            print!(" | {v:>10}");
        }
        println!();
    }
}

pub fn bounds(args: BoundsArgs) -> Result<()> {
    let k = Gaussian;
    let (rows, json): (Vec<(String, String)>, serde_json::Value) = match args.which {
        BoundKind::Mc { n, h, p0, rf } => {
            let r = mc_aiv(n, h, p0, rf, &k)?;
            (vec![("AIV".into(), format!("{:.6e}", r.value))], serde_json::to_value(&r)?)
        }
        BoundKind::Strat { s, interval, rf2, n, h } => {
            let (a, b) = (interval[0], interval[1]);
            let mut rows = Vec::new();
            let mut json = serde_json::Map::new();
            if let Some(rf2) = rf2 {
                let m = strat_mise_bound(s, a, b, rf2, &k)?;
                rows.push(("kappa".into(), format!("{:.6}", m.kappa)));
                rows.push(("h exponent".into(), format!("{:.6}", m.h_exponent)));
                rows.push(("K".into(), format!("{:.6}", m.k_const)));
                rows.push(("nu".into(), format!("{}", round6(m.nu))));
                json.insert("mise".into(), serde_json::to_value(&m)?);
            }
            match (n, h) {
                (Some(n), Some(h)) => {
                    let r = strat_iv_bound(n, h, s, a, b, &k)?;
                    rows.push(("IV bound".into(), format!("{:.6e}", r.value)));
                    json.insert("iv".into(), serde_json::to_value(&r)?);
                }
                (None, None) => {}
                _ => bail!("the stratified IV bound needs both --n and --h"),
            }
            if rows.is_empty() {
                bail!("give --rf2 for the MISE constants and/or --n and --h for the IV bound");
            }
            (rows, serde_json::Value::Object(json))
        }
        BoundKind::Nus { n, h, s, t } => {
            let r = nus_iv_bound(n, h, t, s, &k)?;
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            (vec![("IV bound".into(), format!("{:.6e}", r.value))], serde_json::to_value(&r)?)
        }
        BoundKind::Kh { s } => {
            let r = kh_rates(s)?;
            (
                vec![
                    ("beta".into(), format!("{}", round6(r.beta))),
                    ("delta".into(), format!("{}", round6(r.delta))),
                    ("MISE exponent".into(), format!("{}", round6(r.mise_exponent))),
                    ("h exponent".into(), format!("{}", round6(r.h_exponent))),
                ],
                serde_json::to_value(&r)?,
            )
        }
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&json)?);
    } else {
        let w = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
        for (l, v) in rows {
            println!("{l:w$}  {v}");
        }
    }
    Ok(())
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

pub fn density(args: DensityArgs) -> Result<()> {
    let m = &args.model;
    let model = build_model(
        m.model.as_deref().unwrap_or("normal-sum"),
        m.s,
        m.weights.as_deref(),
        m.path,
        interval_arg(&m.interval),
    )?;
    let iv = model.interval();
    let log2n = args.log2n.unwrap_or(args.preset.log2_n_range().1);
    if log2n > 30 {
        bail!("log2n must be at most 30");
    }
    let spec = SamplerSpec::new(args.sampler, model.dim(), args.seed);
    let points = spec.generate(1 << log2n)?;
    let sample = model.sorted_outputs(&points)?;
    let h = match args.h {
        Some(h) => h,
        None => plugin_chain(&sample, 2, iv.a, iv.b, &Gaussian).context("plug-in bandwidth")?.h_star,
    };
    let xs: Vec<f64> = (0..DENSITY_POINTS)
        .map(|i| iv.a + iv.width() * i as f64 / (DENSITY_POINTS - 1) as f64)
        .collect();
    let fx = kde_evaluate(&sample, h, &Gaussian, &xs)?;
    if let Some(dir) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(fs::File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?);
    writeln!(w, "x,density")?;
    for (x, f) in xs.iter().zip(&fx) {
        writeln!(w, "{x},{f}")?;
    }
    w.flush()?;
    eprintln!("{} {} n = 2^{log2n}, h = {h:.6}", model.name(), args.sampler);
    Ok(())
}

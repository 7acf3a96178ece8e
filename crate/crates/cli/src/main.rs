mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rqmc_kde::harness::Preset;
use rqmc_kde::models::PathConstruction;
use rqmc_kde::SamplerKind;

use config::Ell0;

/// Density estimation with Monte Carlo, stratified and randomized
/// quasi-Monte Carlo samples.
#[derive(Parser, Debug)]
#[command(name = "rqmc-kde", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate IV/MISE surfaces, fit the IV model and validate out of sample.
    Run(RunArgs),
    /// Evaluate closed-form variance bounds and rates.
    Bounds(BoundsArgs),
    /// Write an estimated density curve on a 512-point grid.
    Density(DensityArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct ModelArgs {
    /// normal-sum, cantilever or option.
    #[arg(long)]
    pub model: Option<String>,
    /// Input dimension.
    #[arg(long)]
    pub s: Option<usize>,
    /// equal | geometric | comma list (normal-sum); average | declining | comma list (option).
    #[arg(long)]
    pub weights: Option<String>,
    /// Path construction for the option model: pca, bridge or sequential.
    #[arg(long, value_parser = config::parse_path)]
    pub path: Option<PathConstruction>,
    /// Estimation interval.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_hyphen_values = true)]
    pub interval: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Sampler(s): mc, strat, lms, nus. Repeat or separate with commas.
    #[arg(long, value_delimiter = ',')]
    pub sampler: Vec<SamplerKind>,
    #[arg(long)]
    pub preset: Option<Preset>,
    /// Grid anchor (2 * ell0 an integer) or "auto".
    #[arg(long)]
    pub ell0: Option<Ell0>,
    /// log2 of the smallest n.
    #[arg(long)]
    pub n_min: Option<u32>,
    /// log2 of the largest n.
    #[arg(long)]
    pub n_max: Option<u32>,
    /// Replicates per cell.
    #[arg(long)]
    pub nr: Option<usize>,
    /// Evaluation points.
    #[arg(long)]
    pub ne: Option<usize>,
    /// AISB constant B (plug-in estimate when absent).
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[command(subcommand)]
    pub which: BoundKind,
    /// Print JSON instead of a table.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Subcommand, Debug)]
pub enum BoundKind {
    /// Monte Carlo AIV p0 mu0(k^2)/(nh) [- R(f)/n].
    Mc {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 1.0)]
        p0: f64,
        /// R(f); subtracts R(f)/n when given.
        #[arg(long)]
        rf: Option<f64>,
    },
    /// Stratified MISE constants, and the IV bound when n and h are given.
    Strat {
        #[arg(long)]
        s: usize,
        #[arg(long, num_args = 2, value_names = ["A", "B"], allow_hyphen_values = true, default_values_t = [-2.0, 2.0])]
        interval: Vec<f64>,
        /// R(f'').
        #[arg(long)]
        rf2: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        h: Option<f64>,
    },
    /// Scrambled-net IV bound 2^t 3^s mu0(k^2)/(nh).
    Nus {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        s: usize,
        /// Net quality parameter (0 with a warning when omitted).
        #[arg(long)]
        t: Option<u32>,
    },
    /// Koksma-Hlawka rates.
    Kh {
        #[arg(long)]
        s: usize,
    },
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "nus")]
    pub sampler: SamplerKind,
    #[arg(long, default_value = "desk")]
    pub preset: Preset,
    /// log2 of the sample size (preset maximum when absent).
    #[arg(long)]
    pub log2n: Option<u32>,
    /// Bandwidth (plug-in when absent).
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output CSV file.
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => commands::run(args),
        Command::Bounds(args) => commands::bounds(args),
        Command::Density(args) => commands::density(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

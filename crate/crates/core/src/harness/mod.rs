//! Experimental protocol: IV/MISE surfaces over an `(n, h)` grid, log-log
//! regression of the IV, optimal-bandwidth derivation and an out-of-sample
//! second stage.

mod fit;
mod grid;
mod output;
mod pilot;
mod stage;
mod surface;

pub use fit::{derive_optimal, fit_iv_model, ols, IvFit, OlsFit, OptimalBandwidth, ALPHA};
pub use grid::{ExperimentGrid, Preset, H_COUNT, PAPER_LOG2_N};
pub use output::{write_surface_csv, FitSummary, SURFACE_CSV_HEADER};
pub use pilot::{floor_half, pilot_ell0, PilotConfig, PilotResult};
pub use stage::{run_experiment, second_stage, Experiment, SecondStage, StageBasis};
pub use surface::{estimate_cells, estimate_surface, CellEstimate, IvSurface, SurfaceCell};

//! Experiment orchestration: configs, seeded Monte Carlo, bound sweeps,
//! CSV and SVG output.

pub mod bounds;
pub mod config;
pub mod experiment;
pub mod plot;
pub mod selftest;
pub mod table;

pub use bounds::{run_bound_sweep, write_bounds_csv, BoundRow};
pub use config::{ExperimentConfig, Sweep, Synthesizer};
pub use experiment::{match_estimates, run_experiment, trial_rng, write_results_csv, ResultRow, SourceStats};
pub use plot::{emit_plot, render_svg, PlotKind};
pub use selftest::{run_selftest, Check};
pub use table::Table;

//! Experiment runner behind the `plan` binary.

pub mod band_plan;
pub mod config;
pub mod experiment;
pub mod sweep;

pub use band_plan::{absorption_peaks, auto_band_plan};
pub use config::{load_config, Algorithm, BandSpec, ExperimentConfig, SeedRange};
pub use experiment::{draw_ues, run_algorithm, run_experiment, Aggregate, RunRecord, RunReport};
pub use sweep::absorption_sweep;

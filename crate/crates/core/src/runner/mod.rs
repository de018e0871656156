//! Experiment orchestration, reports, sensitivity sweeps and persistence.

mod config;
mod csvio;
mod experiment;
mod persist;
mod report;
mod sweep;

pub use config::{ExperimentConfig, ModelEntry};
pub use csvio::{read_dataset, read_points, write_dataset, write_points};
pub use experiment::{run_experiment, split_design, AggregateRow, ExperimentReport, RepetitionRow};
pub use persist::{load_model, save_model, MODEL_FORMAT, MODEL_VERSION};
pub use report::emit_report;
pub use sweep::{sensitivity_sweep, SweepRequest, SweepRow};

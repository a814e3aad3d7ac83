//! Ensemble sweeps, error measurement, order estimation and file output.

mod config;
mod ensemble;
mod order;
mod persist;
mod plot;

pub use config::ExperimentConfig;
pub use ensemble::{
    aggregate, l2_error, run_ensemble, Aggregate, CellFailure, ConvergenceRecord, EnsembleOutcome,
};
pub use order::{estimate_order, order_for};
pub use persist::{
    read_aggregates, read_records, summary_path, write_aggregates, write_records, AGGREGATE_HEADER,
    RECORD_HEADER,
};
pub use plot::write_plot_script;

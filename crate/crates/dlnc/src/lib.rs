//! File formats, Monte-Carlo experiment driver and regression replays on
//! top of [`dlnc_core`].

pub mod experiment;
pub mod formats;
pub mod replay;
pub mod report;

pub use experiment::{run_experiment, AlgoSpec, ExperimentConfig, ExperimentResult, SummaryRow, TrialRecord};

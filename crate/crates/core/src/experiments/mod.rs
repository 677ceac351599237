//! Reproducible Monte Carlo experiments: configuration, parallel trials,
//! summary statistics and CSV/JSON output.

mod config;
mod emit;
mod run;
mod stats;

pub use config::{CheckpointSchedule, ExperimentConfig, OutputFormat, ProcessKind, CONFIG_KEYS};
pub use emit::{emit, read_json, write_csv, write_json, Report, CSV_HEADER, TOOL_NAME, TOOL_VERSION};
pub use run::{
    pilot_tau1, run_experiment, run_trial, tenths_label, HittingTimes, Outcome, TrialResult, TrialStatus,
    HAMILTON_TENTHS, PILOT_STREAM,
};
pub use stats::{fmt12, mean_stderr, round12, summarize, wilson, MetricSummary, Proportion, RatioSummary, SummaryStats};

//! Experiment runner: synthetic polynomial regression and WDBC
//! classification comparisons of every aggregation method against the
//! data-sharing baseline, with seeded multi-trial sweeps.

mod config;
mod report;
mod run;

pub use config::{Condition, ExperimentConfig, Method};
pub use report::{
    emit_report, read_rows_csv, summarize, write_outputs, ReportFormat, ReportRow, SummaryRow,
    TraceRow,
};
pub use run::{run_classification, run_experiment, run_regression, RunOutput};

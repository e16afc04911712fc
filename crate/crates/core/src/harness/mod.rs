//! Benchmark problems, error measurement and convergence studies.

mod config;
mod errors;
mod plot;
mod registry;
mod study;
mod verify;

pub use config::{CondSetting, SolverKind, StudyConfig};
pub use errors::{compute_errors, order, ErrorPair, INTERFACE_GAP};
pub use plot::{error_plot, fitted_slope};
pub use registry::{registry_get, ExampleInfo, Smooth, EXAMPLES};
pub use study::{
    reference_solution, run_study, run_study_for, table_csv, write_artifacts, BasisKind,
    StudyOutcome, StudyRow, Timings, REFERENCE_TOLERANCE,
};
pub use verify::{
    check_filter_bank, check_geometry, check_moments, check_span, circle_measures, run_checks,
    span_report, standard_to_hats, Check, SpanReport,
};

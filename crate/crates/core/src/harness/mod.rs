//! Simulation studies, CSV analysis and report output behind the CLI.

pub mod analyze;
pub mod config;
pub mod report;
pub mod study;

pub use analyze::{analyze, analyze_csv, emit_analysis, read_csv, read_csv_path, scores_csv, AnalysisReport, CsvData};
pub use config::{MethodConfig, StudyConfig, ThresholdRule};
pub use report::{emit_report, EigenRow, ReportFormat, ResultRow, StudyReport, SCHEMA_VERSION};
pub use study::{diagnostic_eigenvalues, fit_method, mean_and_sd, replicate_data, run_eigen_study, run_study};

//! Serialization, diagram emission and human-readable reporting.

mod csv_export;
mod dot;
mod project_file;
mod report;

pub use csv_export::coverage_csv;
pub use dot::{export_dot, DotOptions};
pub use project_file::{canonical_json, load_project, load_project_file, save_project, save_project_file, IoError};
pub use report::{build_report, findings_markdown, render_report, ReportBundle, ReportSection};

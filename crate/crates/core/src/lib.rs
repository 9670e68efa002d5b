//! Tracking epistemic uncertainty in hazard analysis.
//!
//! - [`taxonomy`]: the reference catalog of causal factors and keywords.
//! - [`model`]: objects, causal paths and the evidence-driven
//!   Definite/Plausible/Discharged classification.
//! - [`analysis`]: suggestion prompts, view coverage and stale reports.
//! - [`stpa`]: import of STPA control structures and export of findings.
//! - [`io`]: project files, DOT diagrams, CSV and Markdown reports.

pub mod analysis;
pub mod bundled;
pub mod io;
pub mod model;
pub mod stpa;
pub mod taxonomy;

use thiserror::Error;

pub use analysis::{
    factor_usage, gap_report, merge_coverage, stale_report, suggest_paths, AnalysisError,
    CoverageMatrix, RepresentationLevel, SuggestionPrompt, ViewProfile,
};
pub use io::{export_dot, load_project, render_report, save_project, DotOptions, IoError};
pub use model::{
    CausalEndpoint, CausalPath, Classification, LifecyclePhase, ModelError, NewEvidence, NewObject,
    NewPath, ObjectId, OpContext, PathId, Project,
};
pub use stpa::StpaError;
pub use taxonomy::{PrimaryFactor, ReferenceCatalog, SecondaryFactor, TaxonomyError};

/// Any error raised by the library, with a stable name for front ends.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Stpa(#[from] StpaError),
    #[error(transparent)]
    Io(#[from] IoError),
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::Taxonomy(e) => e.name(),
            Error::Model(e) => e.name(),
            Error::Analysis(e) => e.name(),
            Error::Stpa(e) => e.name(),
            Error::Io(e) => e.name(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

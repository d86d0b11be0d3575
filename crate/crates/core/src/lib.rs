//! Virtual gap analysis: slack-price programs for assessing decision-making units,
//! their two-step price normalization, post-analysis scores and the four-phase
//! interactive procedure.

pub mod dataset;
pub mod error;
pub mod four_phase;
pub mod models;
pub mod post_analysis;
pub mod report;
pub mod sbm;
pub mod simplex;

pub use dataset::{Dataset, DmuRecord, IndexName, Violation};
pub use error::{Result, VgaError};
pub use four_phase::{KappaInterval, Phase4Session};
pub use models::{assess, ProgramKind, StepISolution, VgaAssessment};
pub use report::AssessmentReport;
pub use sbm::{compare_sbm_vga, solve_sbm, SbmComparison, SbmResult};

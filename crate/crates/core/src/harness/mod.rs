//! Study orchestration: manifest ingestion, staged execution, and reports.

pub mod ledger;
pub mod manifest;
pub mod stages;

pub use ledger::{Fingerprint, Ledger};
pub use manifest::{ParticipantEntry, ParticipantPlan, RunOptions, StudyManifest, StudyPlan, ingest};
pub use stages::{
    Layout, ReportMetadata, Stage, StageOutcome, run_all, run_corruption_stage, run_evaluation_stage,
    run_prediction_stage, run_report_stage,
};

//! Statistical experiments over replicas, with reports and pre-registered checks.

mod audit;
mod basic;
mod clt;
mod common;
mod local_law;
mod report;
mod spec;
mod uniform;

pub use audit::{inequality_audit, CONSTANTS as AUDIT_CONSTANTS};
pub use basic::{energy_experiment, sample_experiment, transport_experiment};
pub use clt::clt_experiment;
pub use local_law::local_law_experiment;
pub use report::{Check, ExperimentReport, Metadata, ReportRow, Stat};
pub use spec::{Context, ExperimentSpec, Family, SamplerChoice, ScaleRule, Thresholds};
pub use uniform::uniform_fluct_experiment;

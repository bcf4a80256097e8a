//! Configuration, orchestration and report emission for the command line.

pub mod config;
pub mod envelope;
pub mod runners;

pub use config::{JobConfig, OutputFormat};
pub use envelope::{ReportEnvelope, Summary, TableEnvelope, SCHEMA_VERSION};
pub use runners::{run_genus, run_list, run_verify, ListTarget, VerifyTarget};

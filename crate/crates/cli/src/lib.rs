//! Certification reports for BRST-extended constraint systems.
//!
//! [`system`] reads and validates input files, [`report`] runs the pipeline
//! and renders the result as JSON or text.

pub mod report;
pub mod system;

pub use report::{run, Command, Report, RunError, Verdict, SCHEMA_VERSION};
pub use system::{load_system, ConstraintSystem, LoadError, SystemFile};

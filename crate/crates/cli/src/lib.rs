//! Batch verification harness for the `ewtoda` engine.
//!
//! Suites sample guarded points, evaluate named residuals in parallel and
//! collect them into deterministic [`Report`]s. The crate also exports level
//! sets of catalogued Toda potentials and prints the engine's conventions.

pub mod config;
pub mod conventions;
pub mod error;
pub mod export;
pub mod report;
pub mod suites;

pub use config::{parse_config, FileConfig, Format, SuiteSpec};
pub use conventions::show_conventions;
pub use error::{CliError, Result};
pub use export::{export_levelset, LevelSet};
pub use report::{Bound, CheckRecord, Report, Summary};
pub use suites::{run_suite, suite_names};

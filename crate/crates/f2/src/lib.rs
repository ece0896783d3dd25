//! Verification suites, seeded generators and the command-line driver for
//! `f2core`.

pub mod error;
pub mod gen;
pub mod model_suites;
pub mod suites;

pub use error::{CliError, Result};
pub use suites::{run_suite, RunConfig, SuiteResult, SUITES};

//! Batch front end: suite configs in, versioned certificates and CSV tables out.
//!
//! Exit codes: 0 when every certificate verifies, 1 when one fails, 2 for usage errors.

pub mod app;
pub mod cert;
pub mod config;
pub mod suites;

pub use app::{run, write_outputs, EXIT_FAILED, EXIT_OK, EXIT_USAGE};
pub use cert::{emit_certificate, Certificate, Table, SCHEMA_VERSION};
pub use config::{Params, Suite, SuiteConfig};
pub use suites::{run_suite, SuiteError, SuiteOutput};

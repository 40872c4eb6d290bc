//! Configuration and reporting behind the `kgpovm` binary.

// `!(x > 0.0)` is how NaN gets rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::manual_is_multiple_of)]

pub mod config;
pub mod report;

pub use config::{ConfigError, RunConfig};
pub use report::{write_report, Report, SCHEMA_VERSION};

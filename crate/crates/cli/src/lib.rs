//! Command-line front end: field inspection, classification runs, verification suites and
//! graph exports.

pub mod cli;
pub mod report;
pub mod suites;

pub use cli::{main_with_args, run, RunConfig};

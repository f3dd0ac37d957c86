//! Verification suites pairing a geometric side (forms) with a spectral
//! side (eta, spectral flow).

pub mod boundary;
pub mod instances;
pub mod config;
pub mod report;
pub mod suites;

pub use config::{Instance, SuiteConfig};
pub use report::{Check, SuiteReport};
pub use suites::{run_all, run_suite, Executor, Sequential, SUITES};

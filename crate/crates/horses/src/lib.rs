//! File formats, parallel drivers and the command-line front end for the
//! HORSES estimator implemented in `horses-core`.

pub mod cli;
pub mod error;
pub mod io;
pub mod parallel;
pub mod report;

pub use error::CliError;

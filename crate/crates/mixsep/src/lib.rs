//! File formats, parallel drivers and the command-line front end for
//! `mixsep-core`.

pub mod background;
pub mod cache;
pub mod cli;
pub mod error;
pub mod io;
pub mod parallel;
pub mod report;

pub use error::CliError;

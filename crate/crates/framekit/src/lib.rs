//! Frame files, JSON reports and the `framekit` command line on top of
//! [`framekit_core`].

pub mod cli;
pub mod format;
pub mod report;

pub use format::{parse_frame, write_frame, LoadError};
pub use report::{analyze, AnalysisReport, Settings};

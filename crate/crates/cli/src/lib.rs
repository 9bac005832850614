//! Command-line front end: model files, reports and subcommands.

pub mod commands;
pub mod error;
pub mod model;
pub mod report;

//! Command-line front end: dataset I/O, configuration, run manifests and
//! the command implementations behind the `robustnn` binary.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod manifest;

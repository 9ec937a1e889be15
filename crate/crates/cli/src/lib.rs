//! Command-line plumbing around `kc_core`: file formats, configuration, run
//! manifests, verification suites and SVG reports.

pub mod commands;
pub mod config;
pub mod io;
pub mod manifest;
pub mod plots;
pub mod suites;

pub use commands::{run, Cli};

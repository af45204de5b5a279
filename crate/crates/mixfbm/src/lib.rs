//! File formats, command line and parallel experiment runner on top of
//! [`mixfbm_core`].

pub mod cli;
pub mod config;
pub mod json;
pub mod panel_file;
pub mod parallel;
pub mod svg;

pub use mixfbm_core as core;

//! File formats, CSV and SVG export, a thread-pool executor and the
//! `epsrand` command line, on top of `epsrand-core`.

pub mod cli;
pub mod exec;
pub mod export;
pub mod io;
pub mod plot;

pub use epsrand_core as core;

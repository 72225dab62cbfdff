//! Std-side companion to `sfsim-core`: scenario files and presets, threaded
//! simulation driver, CSV/report output.

pub mod io;
pub mod report;
pub mod runner;
pub mod scenario;

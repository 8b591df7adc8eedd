//! File formats, plotting and the command line for `rainshift`.
//!
//! The numerics live in [`rainshift_core`]; this crate reads rainfall tables,
//! runs the analysis steps, and writes JSON reports and SVG figures.

pub mod cli;
pub mod pipeline;
pub mod report;
pub mod svg;
pub mod table;

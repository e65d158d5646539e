//! Command implementations behind the `spoofkit` binary.
//!
//! Each command computes everything first and returns the files it would
//! write as [`output::Outputs`]; nothing touches the output directory until
//! the caller commits them.

pub mod baseline;
pub mod config;
pub mod evaluate;
pub mod extract;
pub mod output;
pub mod plot;
pub mod rank;
pub mod simulate;
pub mod stats;

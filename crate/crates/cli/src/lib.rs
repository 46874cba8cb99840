//! Command-line front end: instance documents, traces and the commands
//! behind the `schelling` binary.
//!
//! Exit codes: 0 found, 1 proven absent, 2 invalid input or tool failure,
//! 3 inconclusive.

pub mod args;
pub mod commands;
pub mod document;
pub mod trace;

pub use args::*;

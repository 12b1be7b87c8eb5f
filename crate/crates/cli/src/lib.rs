//! Config parsing, CSV output and subcommand drivers behind the `charcurv`
//! binary.

pub mod commands;
pub mod config;
pub mod output;

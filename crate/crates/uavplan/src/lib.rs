//! File formats, subcommands and output handling for the `uavplan` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod output;

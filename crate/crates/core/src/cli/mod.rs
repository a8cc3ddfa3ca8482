//! Configuration, subcommands and results export behind the `qos-offload` binary.

pub mod config;
pub mod results;
pub mod run;

//! File formats, parallel search and the command-line front end for
//! `pst-core`.

pub mod cli;
pub mod config;
pub mod export;
pub mod parallel;
pub mod runspec;

pub use config::{load_network, network_to_toml, parse_network, ConfigError};

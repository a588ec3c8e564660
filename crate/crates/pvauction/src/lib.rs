//! File formats, run manifests and the command-line driver around
//! `pvauction-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod csv_io;
pub mod manifest;
pub mod outputs;
pub mod register_files;
pub mod state_map;

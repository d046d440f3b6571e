//! Command-line driver for the crocco-core toolkit.

pub mod commands;
pub mod config;
pub mod io;

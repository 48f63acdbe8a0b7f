//! File formats and subcommands behind the `vlasov-hme` binary.

pub mod commands;
pub mod config;
pub mod csv_io;

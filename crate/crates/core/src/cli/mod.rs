//! File format, sweeps and the command implementations behind the binary.

pub mod commands;
pub mod format;
pub mod sweep;

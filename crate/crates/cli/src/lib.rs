//! Command-line front end for context-content systems: parse exact-fraction
//! system files, validate them, construct couplings, and decide
//! (non)contextuality, with verdict-encoding exit codes.

pub mod commands;
pub mod format;

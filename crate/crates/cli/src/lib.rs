//! Library surface of the experiment runner so integration and acceptance
//! tests can drive the commands directly.

pub mod commands;
pub mod config;

//! Library surface of the `focaler-iou` CLI: subcommand implementations,
//! file formats and the bundled reference fixtures, shared with the
//! integration tests.

pub mod commands;
pub mod config;
pub mod fixtures;
pub mod records;

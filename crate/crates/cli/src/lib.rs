//! Command-line companion to `rdhei-core`: file IO, report rendering and
//! the benchmark harness, shared between the binary and integration tests.

pub mod bench;
pub mod files;
pub mod report;

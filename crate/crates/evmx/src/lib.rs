//! Host-side tooling for `evmx-core`: input parsing, corpus loading, block
//! execution, report formatting and the `evmx` command line.

pub mod block;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod input;
pub mod report;

pub use block::{run_block, BlockReport, BlockSpec, TxSpec};
pub use error::CliError;

//! File formats, checkpointing and multi-threaded drivers around `lp-core`,
//! plus the `lp` command-line tool.

pub mod archive;
pub mod checkpoint;
pub mod cli;
pub mod error;
pub mod parallel;
pub mod seqfile;
pub mod stats;

pub use error::{LpError, LpResult};
pub use lp_core;

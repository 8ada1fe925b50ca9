//! File formats, checkpoints and the command-line interface for the rhyme
//! GAN. The models themselves live in `rhymegan-core`.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod jsonl;

pub use error::{Error, Result};

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

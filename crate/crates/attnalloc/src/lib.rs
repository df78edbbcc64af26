//! File formats, TOML configuration and the `attnalloc` command line on top
//! of [`attnalloc_core`].

pub mod cli;
pub mod config;
mod error;
pub mod formats;

pub use error::{Error, Result};

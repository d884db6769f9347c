//! Files, configuration, training and evaluation drivers, and the command
//! line for `de-ddqn-core`.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod dump;
pub mod error;
pub mod eval;
pub mod train;
pub mod transform_io;

pub use config::Config;
pub use error::{Error, Result};

//! Library surface of the experiment CLI: config parsing/validation and
//! the deterministic experiment runner. The binary in `main.rs` is a thin
//! flag wrapper over [`runner::run`].

pub mod config;
pub mod runner;

pub use config::{Command, Config};
pub use runner::{run, RunError, RunOutcome};

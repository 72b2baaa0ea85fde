//! Library side of the `zoh` binary: config handling and the four commands.
//!
//! Exit codes are a fixed contract: 0 success, 1 I/O failure, 2 usage,
//! 3 divergence, 4 verification failure.

/// `println!` that ignores a closed stdout, e.g. when piped into `head`.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

pub mod config;
pub mod output;
pub mod plan;
pub mod run;
pub mod sweep;
pub mod verify;

use serde_json::Value;

pub use config::ExperimentConfig;

pub const SCHEMA_VERSION: &str = "1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Divergence(_) => EXIT_DIVERGENCE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<zoh_core::Error> for CliError {
    fn from(e: zoh_core::Error) -> Self {
        match e {
            zoh_core::Error::Usage(msg) => CliError::Usage(msg),
            zoh_core::Error::Evaluation { .. } => CliError::Divergence(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// What a command wrote, plus the exit code it asks for.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub summary: Value,
    pub exit_code: i32,
}

impl Outcome {
    pub fn ok(summary: Value) -> Self {
        Self { summary, exit_code: EXIT_OK }
    }
}

//! Threads, files and the command line around `h2dist-core`: a simulated
//! message-passing network, a rayon executor, end-to-end drivers and the
//! `bench` tool's configuration and reports.

pub mod config;
pub mod exec;
pub mod outline;
pub mod pipeline;
pub mod report;
pub mod runner;
pub mod sim;

pub use h2dist_core as core;

/// Failures of the `bench` tool, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Core(#[from] h2dist_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Other(String),
}

impl BenchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_) => 2,
            BenchError::Verification(_) => 3,
            _ => 1,
        }
    }
}

//! Command implementations behind the `layerforge` binary. Each command is a
//! plain function over a typed argument struct so tests can drive it without
//! spawning a process.

pub mod commands;
pub mod manifest;

use thiserror::Error;

/// Command failures, mapped onto the documented process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Exit 2: missing or invalid input (sources, manifests, images).
    #[error("{0}")]
    Input(String),
    /// Exit 3: bad configuration or malformed JSON.
    #[error("{0}")]
    Config(String),
    /// Exit 4: geometric impossibility (crop or output size too large).
    #[error("{0}")]
    Geometry(String),
    /// Exit 5: unreadable or inconsistent checkpoint.
    #[error("{0}")]
    Checkpoint(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Config(_) => 3,
            CliError::Geometry(_) => 4,
            CliError::Checkpoint(_) => 5,
        }
    }
}

/// Worker pool for per-record parallelism, capped by `LAYERFORGE_THREADS`.
pub fn thread_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("LAYERFORGE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        builder = builder.num_threads(n);
    }
    builder.build().expect("failed to build worker pool")
}

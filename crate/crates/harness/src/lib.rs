//! Experiment plans, seeded parallel runs, CSV emission and summary
//! statistics for the `nsga3-core` engine.

pub mod acceptance;
pub mod plan;
pub mod runner;
pub mod stats;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("cannot parse plan: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Core(#[from] nsga3_core::error::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("cannot build worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

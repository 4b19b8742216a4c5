//! Distances between finite-horizon linear behaviors.
//!
//! A finite-horizon behavior is a linear subspace of `R^{qL}`. This crate
//! builds such subspaces from trajectory data, kernel representations and
//! state-space models, and compares them with principal-angle metrics that
//! stay meaningful when the subspaces have different dimensions.
//!
//! ```
//! use behavior_metrics::{linalg::Subspace, metrics::{distance, MetricKind}};
//! use nalgebra::DMatrix;
//!
//! let line = Subspace::from_columns(&DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0])).unwrap();
//! let plane = Subspace::from_columns(&DMatrix::from_column_slice(
//!     3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
//! )).unwrap();
//! let d = distance(MetricKind::Chordal, &line, &plane).unwrap();
//! assert!((d - 1.0).abs() < 1e-12);
//! ```

pub mod anomaly;
pub mod behaviors;
pub mod cli;
pub mod error;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod modeling;

pub use error::{Error, Result};

/// Environment variable holding the seed for randomized data generation.
pub const SEED_ENV: &str = "BEHAVIOR_METRICS_SEED";

/// Seed read from [`SEED_ENV`], or `default` when unset or unparsable.
pub fn seed_from_env(default: u64) -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(default)
}

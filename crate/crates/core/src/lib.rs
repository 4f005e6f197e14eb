//! Symmetry-aware calibration analysis.
//!
//! Finite group actions on weighted datasets, calibration metrics for
//! classifiers and Gaussian regressors, lower and upper bounds on those
//! metrics induced by invariant or equivariant models, evidential losses and
//! small seeded toy models.

pub mod bounds;
pub mod cli;
pub mod dataset;
pub mod evidential;
pub mod error;
pub mod generators;
pub mod group;
pub mod metrics;
pub mod models;
pub mod numeric;
pub mod rng;
pub mod symmetry;
pub mod worked;

pub use error::{Error, Result};

//! Consistent scoring functions for spatial and temporal point-process
//! forecasts, with the simulators and Diebold-Mariano machinery needed to
//! compare forecasts by Monte Carlo.

use std::sync::Arc;

pub mod catalog;
pub mod config;
pub mod elementary;
pub mod error;
pub mod evaluation;
pub mod patterns;
pub mod quadrature;
pub mod runner;
pub mod scores;
pub mod simulate;
pub mod triggering;

pub use error::{Error, Result};

/// Shared real-valued function on window coordinates.
pub type SpatialFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

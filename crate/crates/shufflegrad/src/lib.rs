//! Finite-sum optimization with shuffling-based variance reduction.

pub mod analysis;
pub mod certify;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod objective;
pub mod optimizers;
pub mod shuffling;

pub use error::{Error, Result};

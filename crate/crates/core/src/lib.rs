//! Near-critical Hawkes processes simulated by Poisson imbedding, coupled
//! with CIR-type limit processes through a Gaussianized Brownian sheet.

pub mod coupling;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod hawkes;
pub mod kernels;
pub mod limit;
pub mod quad;
pub mod resolvent;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};

//! Mollified Euler–Maruyama simulation of SDEs driven by symmetric α-stable
//! noise with distributional drift, together with the Littlewood–Paley,
//! heat-kernel and rate-fitting machinery used to check its convergence.

pub mod besov;
pub mod euler;
pub mod harness;
pub mod heat_kernel;
pub mod error;
pub mod metrics;
pub mod quadrature;
pub mod reduce;
pub mod rng;
pub mod sampling;
pub mod stable_model;

pub use error::{Error, Result};

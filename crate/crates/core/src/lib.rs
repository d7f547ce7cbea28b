//! Compressive Bayesian Poisson non-negative matrix factorization.
//!
//! Counts `X` (channels × samples) are modelled as `Poisson(RΘ)` with Dirichlet signatures,
//! gamma loadings and per-factor relevance weights μ_k whose inverse-gamma hyperprior
//! grows with the number of samples, so unused factors collapse to μ_k ≈ ε.

pub mod cusp;
pub mod distributions;
pub mod error;
pub mod io;
pub mod model;
pub mod rng;
pub mod sampler;
pub mod selection;
pub mod simulate;

pub use error::{Error, Result};
pub use rng::Rng;

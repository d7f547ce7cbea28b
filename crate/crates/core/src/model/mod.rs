//! The hierarchical Poisson factorization model.

pub mod config;
pub mod posterior;
pub mod theory;
pub mod types;

pub use config::{ChainState, HyperpriorMode, InformativePriorConfig, ModelConfig};
pub use posterior::log_posterior;
pub use theory::{
    expected_loading, log_marginal_latent_pmf, marginal_latent_pmf, posterior_mu_params, posterior_params_for_shape,
};
pub use types::{CountMatrix, LatentCountTensor, LoadingMatrix, RelevanceVector, SignatureMatrix};

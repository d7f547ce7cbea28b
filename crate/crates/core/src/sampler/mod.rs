//! Gibbs sampler for the compressive model.

pub mod chain;
pub mod elicit;
mod engine;
pub mod rematch;

pub use chain::{
    init_from_prior, quantile_sorted, run_chain, run_chain_from, run_inference, run_inference_with_hook,
    ChainReport, PosteriorSamples, SamplerConfig,
};
pub use elicit::{default_beta_grid, elicit_beta, log_grid, Elicited};
pub use engine::{gibbs_step_latent, gibbs_step_loadings, gibbs_step_relevance, gibbs_step_signatures};
pub use rematch::{rematch_permutation, rematch_to_catalog};

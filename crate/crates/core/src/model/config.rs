//! Model hyperparameters and the Gibbs chain state.

use super::types::{LatentCountTensor, LoadingMatrix, RelevanceVector, SignatureMatrix};
use crate::error::{Error, Result};
use ndarray::{s, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

/// Hyperprior placed on the relevance weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum HyperpriorMode {
    /// μ_k ~ InvGamma(aJ + 1, εaJ): prior strength grows with the sample size.
    Compressive,
    /// μ_k ~ InvGamma(a0, b0) regardless of J.
    FixedStrength { a0: f64, b0: f64 },
}

/// Known signatures used as Dirichlet prior centres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InformativePriorConfig {
    /// I×K_pre catalog, columns on the simplex.
    pub s: SignatureMatrix,
    /// Dirichlet concentration per known signature.
    pub beta: Vec<f64>,
    /// Gamma shape for loadings of known signatures.
    pub b: f64,
    /// Number of additional de novo signatures.
    pub k_new: usize,
    /// Catalog labels, one per known signature.
    pub labels: Vec<String>,
}

impl InformativePriorConfig {
    pub fn k_pre(&self) -> usize {
        self.s.n_factors()
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta.len() != self.k_pre() || self.labels.len() != self.k_pre() {
            return Err(Error::Dimension(format!(
                "{} catalog signatures but {} beta values and {} labels",
                self.k_pre(),
                self.beta.len(),
                self.labels.len()
            )));
        }
        if self.beta.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
            return Err(Error::domain("beta values must be positive"));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::domain("b must be positive"));
        }
        if self.k_pre() + self.k_new == 0 {
            return Err(Error::domain("informative model needs at least one factor"));
        }
        Ok(())
    }
}

/// Hyperparameters of the factorization model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Number of factors (ignored in informative mode, where K_pre + K_new is used).
    pub k: usize,
    pub epsilon: f64,
    pub a: f64,
    pub alpha: f64,
    pub informative: Option<InformativePriorConfig>,
    pub hyperprior: HyperpriorMode,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            k: 20,
            epsilon: 0.001,
            a: 1.0,
            alpha: 0.5,
            informative: None,
            hyperprior: HyperpriorMode::Compressive,
        }
    }
}

/// Per-factor hyperparameters resolved from a [`ModelConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum FactorPrior<'a> {
    /// Symmetric Dirichlet(α) signature, loadings with shape `a`.
    DeNovo,
    /// Dirichlet(β s) signature centred on a catalog column.
    Known { beta: f64, s: ArrayView1<'a, f64> },
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !pos(self.epsilon) || !pos(self.a) || !pos(self.alpha) {
            return Err(Error::domain("epsilon, a and alpha must be positive"));
        }
        if let HyperpriorMode::FixedStrength { a0, b0 } = self.hyperprior {
            if !pos(a0) || !pos(b0) {
                return Err(Error::domain("a0 and b0 must be positive"));
            }
        }
        match &self.informative {
            Some(inf) => inf.validate()?,
            None if self.k == 0 => return Err(Error::domain("K must be at least 1")),
            None => {}
        }
        Ok(())
    }

    /// Total number of factors in the chain state.
    pub fn total_factors(&self) -> usize {
        match &self.informative {
            Some(inf) => inf.k_pre() + inf.k_new,
            None => self.k,
        }
    }

    /// Number of leading factors tied to catalog signatures.
    pub fn k_pre(&self) -> usize {
        self.informative.as_ref().map_or(0, |i| i.k_pre())
    }

    /// Gamma shape of the loadings of factor `k` (b for known signatures, a otherwise).
    pub fn loading_shape(&self, k: usize) -> f64 {
        match &self.informative {
            Some(inf) if k < inf.k_pre() => inf.b,
            _ => self.a,
        }
    }

    pub(crate) fn factor_prior(&self, k: usize) -> FactorPrior<'_> {
        match &self.informative {
            Some(inf) if k < inf.k_pre() => FactorPrior::Known {
                beta: inf.beta[k],
                s: inf.s.column(k),
            },
            _ => FactorPrior::DeNovo,
        }
    }

    /// Inverse-gamma (shape, scale) hyperprior of factor `k` given J samples.
    pub fn relevance_prior(&self, k: usize, n_samples: usize) -> (f64, f64) {
        let shape = self.loading_shape(k);
        let j = n_samples as f64;
        match self.hyperprior {
            HyperpriorMode::Compressive => (shape * j + 1.0, self.epsilon * shape * j),
            HyperpriorMode::FixedStrength { a0, b0 } => (a0, b0),
        }
    }
}

/// Full sampler state. In informative mode the first K_pre factors carry the
/// catalog-anchored block (ρ, ω, τ) and the remaining ones the de novo block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub r: SignatureMatrix,
    pub theta: LoadingMatrix,
    pub mu: RelevanceVector,
    pub y: LatentCountTensor,
    pub k_pre: usize,
    pub iteration: usize,
}

impl ChainState {
    pub fn n_factors(&self) -> usize {
        self.r.n_factors()
    }

    /// Catalog-anchored signatures ρ (I×K_pre).
    pub fn rho(&self) -> ArrayView2<'_, f64> {
        self.r.0.slice(s![.., ..self.k_pre])
    }

    /// Loadings ω of catalog-anchored signatures (K_pre×J).
    pub fn omega(&self) -> ArrayView2<'_, f64> {
        self.theta.0.slice(s![..self.k_pre, ..])
    }

    /// Relevance weights τ of catalog-anchored signatures.
    pub fn tau(&self) -> ArrayView1<'_, f64> {
        self.mu.0.slice(s![..self.k_pre])
    }

    /// Checks that dimensions agree with each other and with `config`.
    pub fn check_dims(&self, config: &ModelConfig, n_channels: usize, n_samples: usize) -> Result<()> {
        let k = config.total_factors();
        let ok = self.r.0.dim() == (n_channels, k)
            && self.theta.0.dim() == (k, n_samples)
            && self.mu.len() == k
            && self.y.dims() == (n_channels, n_samples, k)
            && self.k_pre == config.k_pre();
        if !ok {
            return Err(Error::Dimension(format!(
                "state dims R {:?}, Theta {:?}, mu {}, Y {:?} do not match I={n_channels}, J={n_samples}, K={k}",
                self.r.0.dim(),
                self.theta.0.dim(),
                self.mu.len(),
                self.y.dims()
            )));
        }
        Ok(())
    }
}

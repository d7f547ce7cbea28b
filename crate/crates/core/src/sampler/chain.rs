//! Chain initialisation, the full Gibbs cycle and multi-chain selection.

use super::engine::{normalise_layout, Engine};
use super::rematch::rematch_to_catalog;
use crate::distributions::samplers::{dirichlet_into, gamma, inv_gamma};
use crate::error::{Error, Result};
use crate::model::{
    ChainState, CountMatrix, LatentCountTensor, LoadingMatrix, ModelConfig, RelevanceVector, SignatureMatrix,
};
use crate::rng::{derive_seed, Rng};
use ndarray::{s, Array1, Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Run-length and seeding controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n_iter: usize,
    pub burn_in: usize,
    pub n_chains: usize,
    pub seed: u64,
    pub thin: usize,
    /// Catalog rematch during burn-in (informative mode only).
    pub rematch: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            n_iter: 5000,
            burn_in: 4000,
            n_chains: 1,
            seed: 0,
            thin: 1,
            rematch: true,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iter == 0 || self.burn_in >= self.n_iter {
            return Err(Error::domain(format!(
                "need 0 <= burn_in < n_iter, got burn_in={} n_iter={}",
                self.burn_in, self.n_iter
            )));
        }
        if self.thin == 0 || self.n_chains == 0 {
            return Err(Error::domain("thin and n_chains must be at least 1"));
        }
        Ok(())
    }

    /// Number of retained draws, `⌊(n_iter − burn_in)/thin⌋`.
    pub fn n_retained(&self) -> usize {
        (self.n_iter - self.burn_in) / self.thin
    }

    /// Sweep index (0-based) before which the catalog rematch runs.
    pub fn rematch_iteration(&self) -> usize {
        2 * self.burn_in / 3
    }

    /// Seed of chain `index`.
    pub fn chain_seed(&self, index: usize) -> u64 {
        derive_seed(self.seed, index as u64)
    }
}

/// Outcome of one chain in a multi-chain run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub index: usize,
    pub seed: u64,
    pub mean_log_posterior: Option<f64>,
    pub error: Option<String>,
}

/// Retained draws of one chain. In informative mode the first `k_pre` factors are the
/// catalog-anchored block (ρ, ω, τ).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PosteriorSamples {
    pub r: Vec<Array2<f64>>,
    pub theta: Vec<Array2<f64>>,
    pub mu: Vec<Array1<f64>>,
    /// Log posterior after every sweep, burn-in included.
    pub log_posterior: Vec<f64>,
    /// Log posterior at the retained draws.
    pub retained_log_posterior: Vec<f64>,
    pub k_pre: usize,
    pub chain_index: usize,
    pub chain_seed: u64,
    pub model: ModelConfig,
    pub sampler: SamplerConfig,
    pub chains: Vec<ChainReport>,
    pub final_state: ChainState,
}

impl PosteriorSamples {
    pub fn n_draws(&self) -> usize {
        self.mu.len()
    }

    pub fn n_factors(&self) -> usize {
        self.final_state.n_factors()
    }

    pub fn mean_log_posterior(&self) -> f64 {
        self.retained_log_posterior.iter().sum::<f64>() / self.retained_log_posterior.len() as f64
    }

    fn mean_of(xs: &[Array2<f64>]) -> Array2<f64> {
        let mut acc = Array2::zeros(xs[0].dim());
        for x in xs {
            acc += x;
        }
        acc / xs.len() as f64
    }

    pub fn mean_r(&self) -> Array2<f64> {
        Self::mean_of(&self.r)
    }

    pub fn mean_theta(&self) -> Array2<f64> {
        Self::mean_of(&self.theta)
    }

    pub fn mean_mu(&self) -> Array1<f64> {
        let mut acc = Array1::zeros(self.mu[0].len());
        for m in &self.mu {
            acc += m;
        }
        acc / self.mu.len() as f64
    }

    /// Trace of μ_k across retained draws.
    pub fn mu_trace(&self, k: usize) -> Vec<f64> {
        self.mu.iter().map(|m| m[k]).collect()
    }

    /// Retained ρ draws (catalog-anchored signature block).
    pub fn rho(&self) -> Vec<Array2<f64>> {
        self.r.iter().map(|r| r.slice(s![.., ..self.k_pre]).to_owned()).collect()
    }

    /// Retained ω draws.
    pub fn omega(&self) -> Vec<Array2<f64>> {
        self.theta.iter().map(|t| t.slice(s![..self.k_pre, ..]).to_owned()).collect()
    }

    /// Retained τ draws.
    pub fn tau(&self) -> Vec<Array1<f64>> {
        self.mu.iter().map(|m| m.slice(s![..self.k_pre]).to_owned()).collect()
    }
}

/// Draws every parameter from its prior and then performs one latent step.
///
/// Order: μ_k from the hyperprior, θ_kj | μ_k, r_k from its Dirichlet prior.
pub fn init_from_prior(data: &CountMatrix, config: &ModelConfig, rng: &mut Rng) -> Result<ChainState> {
    let (ni, nj) = data.counts().dim();
    let nk = config.total_factors();
    let engine = Engine::new(data, config);
    let mut mu = Array1::zeros(nk);
    let mut theta = Array2::zeros((nk, nj));
    let mut r = Array2::zeros((ni, nk));
    for k in 0..nk {
        let (shape, scale) = config.relevance_prior(k, nj);
        mu[k] = inv_gamma(shape, scale, rng).max(f64::MIN_POSITIVE);
    }
    for k in 0..nk {
        let a = config.loading_shape(k);
        for j in 0..nj {
            theta[[k, j]] = gamma(a, a / mu[k], rng).max(f64::MIN_POSITIVE);
        }
    }
    let mut conc = vec![0.0; ni];
    let mut col = vec![0.0; ni];
    for k in 0..nk {
        for (i, c) in conc.iter_mut().enumerate() {
            *c = engine.dirichlet_base(i, k);
        }
        dirichlet_into(&conc, &mut col, rng);
        for i in 0..ni {
            r[[i, k]] = col[i];
        }
    }
    let mut state = ChainState {
        r: SignatureMatrix(r),
        theta: LoadingMatrix(theta),
        mu: RelevanceVector(mu),
        y: LatentCountTensor::zeros(ni, nj, nk),
        k_pre: config.k_pre(),
        iteration: 0,
    };
    let mut engine = engine;
    engine.latent(&mut state, rng)?;
    Ok(state)
}

fn validate_inputs(data: &CountMatrix, config: &ModelConfig, sc: &SamplerConfig) -> Result<()> {
    config.validate()?;
    sc.validate()?;
    if let Some(inf) = &config.informative {
        if inf.s.n_channels() != data.n_channels() {
            return Err(Error::Dimension(format!(
                "catalog has {} channels, data has {}",
                inf.s.n_channels(),
                data.n_channels()
            )));
        }
    }
    Ok(())
}

/// Runs one chain from a given starting state.
pub fn run_chain_from(
    data: &CountMatrix,
    config: &ModelConfig,
    sc: &SamplerConfig,
    mut state: ChainState,
    rng: &mut Rng,
) -> Result<PosteriorSamples> {
    validate_inputs(data, config, sc)?;
    let (ni, nj) = data.counts().dim();
    state.check_dims(config, ni, nj)?;
    normalise_layout(&mut state);
    let mut engine = Engine::new(data, config);
    let retained = sc.n_retained();
    let mut out_r = Vec::with_capacity(retained);
    let mut out_t = Vec::with_capacity(retained);
    let mut out_m = Vec::with_capacity(retained);
    let mut lp_all = Vec::with_capacity(sc.n_iter);
    let mut lp_kept = Vec::with_capacity(retained);
    let rematch_at = sc.rematch_iteration();
    for it in 0..sc.n_iter {
        if it == rematch_at && it > 0 && sc.rematch && config.informative.is_some() {
            rematch_to_catalog(&mut state, config);
        }
        engine.sweep(&mut state, rng)?;
        let lp = engine.log_posterior(&state, data);
        if !lp.is_finite() {
            return Err(Error::InvalidState(format!(
                "log posterior is {lp} after sweep {}; min mu {:e}, min theta {:e}",
                it + 1,
                state.mu.0.iter().cloned().fold(f64::INFINITY, f64::min),
                state.theta.0.iter().cloned().fold(f64::INFINITY, f64::min),
            )));
        }
        lp_all.push(lp);
        if it >= sc.burn_in && (it + 1 - sc.burn_in) % sc.thin == 0 {
            out_r.push(state.r.0.clone());
            out_t.push(state.theta.0.clone());
            out_m.push(state.mu.0.clone());
            lp_kept.push(lp);
        }
    }
    Ok(PosteriorSamples {
        r: out_r,
        theta: out_t,
        mu: out_m,
        log_posterior: lp_all,
        retained_log_posterior: lp_kept,
        k_pre: config.k_pre(),
        chain_index: 0,
        chain_seed: 0,
        model: config.clone(),
        sampler: sc.clone(),
        chains: Vec::new(),
        final_state: state,
    })
}

/// Initialises from the prior with `chain_seed` and runs one chain.
pub fn run_chain(data: &CountMatrix, config: &ModelConfig, sc: &SamplerConfig, chain_seed: u64) -> Result<PosteriorSamples> {
    run_chain_hooked(data, config, sc, chain_seed, 0, &|_, _| {})
}

fn run_chain_hooked(
    data: &CountMatrix,
    config: &ModelConfig,
    sc: &SamplerConfig,
    chain_seed: u64,
    index: usize,
    hook: &(dyn Fn(usize, &mut ChainState) + Sync),
) -> Result<PosteriorSamples> {
    validate_inputs(data, config, sc)?;
    let mut rng = Rng::seed_from_u64(chain_seed);
    let mut state = init_from_prior(data, config, &mut rng)?;
    hook(index, &mut state);
    let mut out = run_chain_from(data, config, sc, state, &mut rng)?;
    out.chain_seed = chain_seed;
    out.chain_index = index;
    Ok(out)
}

/// Runs `n_chains` chains in parallel and keeps the one with the highest mean retained
/// log posterior (ties go to the lower index).
pub fn run_inference(data: &CountMatrix, config: &ModelConfig, sc: &SamplerConfig) -> Result<PosteriorSamples> {
    run_inference_with_hook(data, config, sc, &|_, _| {})
}

/// As [`run_inference`], applying `hook(chain_index, state)` to each chain's initial state.
pub fn run_inference_with_hook(
    data: &CountMatrix,
    config: &ModelConfig,
    sc: &SamplerConfig,
    hook: &(dyn Fn(usize, &mut ChainState) + Sync),
) -> Result<PosteriorSamples> {
    validate_inputs(data, config, sc)?;
    let results: Vec<Result<PosteriorSamples>> = (0..sc.n_chains)
        .into_par_iter()
        .map(|c| run_chain_hooked(data, config, sc, sc.chain_seed(c), c, hook))
        .collect();
    let reports: Vec<ChainReport> = results
        .iter()
        .enumerate()
        .map(|(c, r)| ChainReport {
            index: c,
            seed: sc.chain_seed(c),
            mean_log_posterior: r.as_ref().ok().map(|s| s.mean_log_posterior()),
            error: r.as_ref().err().map(|e| e.to_string()),
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for rep in &reports {
        if let Some(m) = rep.mean_log_posterior {
            if m.is_finite() && best.is_none_or(|(_, b)| m > b) {
                best = Some((rep.index, m));
            }
        }
    }
    let Some((idx, _)) = best else {
        let msgs: Vec<String> = reports
            .iter()
            .map(|r| format!("chain {}: {}", r.index, r.error.as_deref().unwrap_or("non-finite log posterior")))
            .collect();
        return Err(Error::InvalidState(format!("all chains failed: {}", msgs.join("; "))));
    };
    let mut chosen = results.into_iter().nth(idx).expect("index in range")?;
    chosen.chains = reports;
    Ok(chosen)
}

impl PosteriorSamples {
    /// Per-entry `(lower, upper)` equal-tailed quantiles of the signature draws.
    pub fn r_quantiles(&self, lower: f64, upper: f64) -> (Array2<f64>, Array2<f64>) {
        entry_quantiles(&self.r, lower, upper)
    }

    pub fn theta_quantiles(&self, lower: f64, upper: f64) -> (Array2<f64>, Array2<f64>) {
        entry_quantiles(&self.theta, lower, upper)
    }

    /// Stacks a per-draw column of R into a draws×I matrix.
    pub fn r_column_draws(&self, k: usize) -> Array2<f64> {
        let views: Vec<_> = self.r.iter().map(|r| r.column(k)).collect();
        ndarray::stack(Axis(0), &views).expect("equal lengths")
    }
}

/// Sample quantile with linear interpolation between order statistics.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let f = pos - lo as f64;
    sorted[lo] + f * (sorted[hi] - sorted[lo])
}

fn entry_quantiles(draws: &[Array2<f64>], lower: f64, upper: f64) -> (Array2<f64>, Array2<f64>) {
    let dim = draws[0].dim();
    let mut lo = Array2::zeros(dim);
    let mut hi = Array2::zeros(dim);
    let mut buf = vec![0.0; draws.len()];
    for a in 0..dim.0 {
        for b in 0..dim.1 {
            for (v, d) in buf.iter_mut().zip(draws) {
                *v = d[[a, b]];
            }
            buf.sort_by(f64::total_cmp);
            lo[[a, b]] = quantile_sorted(&buf, lower);
            hi[[a, b]] = quantile_sorted(&buf, upper);
        }
    }
    (lo, hi)
}

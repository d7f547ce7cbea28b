//! Fixed-truncation cumulative shrinkage (CUSP) Poisson factorization baseline.
//!
//! θ_kj = ϑ_kj μ_k with ϑ_kj ~ Gamma(a, a) and μ_k drawn from a spike at μ∞ or a
//! Gamma(a0, b0) slab. The spike probability of factor k is the stick-breaking mass
//! φ_1 + … + φ_k, so it increases with the index.

use crate::distributions::samplers::{beta, dirichlet_into, gamma, multinomial_into};
use crate::error::{Error, Result};
use crate::model::{CountMatrix, LatentCountTensor};
use crate::rng::Rng;
use crate::sampler::{ChainReport, SamplerConfig};
use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspConfig {
    /// Truncation level.
    pub k: usize,
    pub a: f64,
    pub alpha: f64,
    /// Stick-breaking concentration.
    pub alpha_pi: f64,
    pub mu_inf: f64,
    pub a0: f64,
    pub b0: f64,
}

impl Default for CuspConfig {
    fn default() -> Self {
        CuspConfig {
            k: 20,
            a: 1.0,
            alpha: 0.5,
            alpha_pi: 5.0,
            mu_inf: 0.01,
            a0: 1.0,
            b0: 1.0,
        }
    }
}

impl CuspConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if self.k == 0 {
            return Err(Error::domain("CUSP truncation must be at least 1"));
        }
        if ![self.a, self.alpha, self.alpha_pi, self.mu_inf, self.a0, self.b0].into_iter().all(pos) {
            return Err(Error::domain("CUSP hyperparameters must be positive"));
        }
        Ok(())
    }
}

/// Sampler state. `z[k]` takes values in 1..=K; factor k (1-based) is spiked when z ≤ k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspState {
    pub r: Array2<f64>,
    pub vartheta: Array2<f64>,
    pub mu: Array1<f64>,
    pub v: Vec<f64>,
    pub phi: Vec<f64>,
    pub z: Vec<usize>,
    pub y: LatentCountTensor,
}

impl CuspState {
    pub fn theta(&self) -> Array2<f64> {
        let mut t = self.vartheta.clone();
        for (mut row, &m) in t.outer_iter_mut().zip(&self.mu) {
            row *= m;
        }
        t
    }

    /// Whether factor `k` (0-based) sits in the spike.
    pub fn is_spike(&self, k: usize) -> bool {
        self.z[k] <= k + 1
    }

    pub fn n_active(&self) -> usize {
        (0..self.z.len()).filter(|&k| !self.is_spike(k)).count()
    }
}

/// φ from the sticks: φ_ℓ = v_ℓ ∏_{m<ℓ} (1 − v_m).
pub fn stick_weights(v: &[f64]) -> Vec<f64> {
    let mut rest = 1.0;
    v.iter()
        .map(|&vl| {
            let p = vl * rest;
            rest *= 1.0 - vl;
            p
        })
        .collect()
}

fn draw_categorical_log(logw: &[f64], rng: &mut Rng) -> usize {
    let m = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|&l| (l - m).exp()).collect();
    let total: f64 = w.iter().sum();
    let mut u = rng.uniform() * total;
    for (i, &x) in w.iter().enumerate() {
        if u < x {
            return i;
        }
        u -= x;
    }
    // rounding: last index with positive weight
    w.iter().rposition(|&x| x > 0.0).unwrap_or(0)
}

/// Draws the initial state from the prior followed by one latent step.
pub fn init_cusp(data: &CountMatrix, cfg: &CuspConfig, rng: &mut Rng) -> Result<CuspState> {
    cfg.validate()?;
    let (ni, nj) = data.counts().dim();
    let nk = cfg.k;
    let mut v: Vec<f64> = (0..nk).map(|_| beta(1.0, cfg.alpha_pi, rng)).collect();
    v[nk - 1] = 1.0;
    let phi = stick_weights(&v);
    let logphi: Vec<f64> = phi.iter().map(|p| p.ln()).collect();
    let z: Vec<usize> = (0..nk).map(|_| draw_categorical_log(&logphi, rng) + 1).collect();
    let mu = Array1::from_iter((0..nk).map(|k| {
        if z[k] <= k + 1 {
            cfg.mu_inf
        } else {
            gamma(cfg.a0, cfg.b0, rng).max(f64::MIN_POSITIVE)
        }
    }));
    let vartheta = Array2::from_shape_fn((nk, nj), |_| gamma(cfg.a, cfg.a, rng).max(f64::MIN_POSITIVE));
    let mut r = Array2::zeros((ni, nk));
    let conc = vec![cfg.alpha; ni];
    let mut col = vec![0.0; ni];
    for k in 0..nk {
        dirichlet_into(&conc, &mut col, rng);
        for i in 0..ni {
            r[[i, k]] = col[i];
        }
    }
    let mut st = CuspState {
        r,
        vartheta,
        mu,
        v,
        phi,
        z,
        y: LatentCountTensor::zeros(ni, nj, nk),
    };
    latent(&mut st, data, rng)?;
    Ok(st)
}

fn latent(st: &mut CuspState, data: &CountMatrix, rng: &mut Rng) -> Result<()> {
    let (ni, nj) = data.counts().dim();
    let nk = st.mu.len();
    let theta = st.theta();
    let mut w = vec![0.0; nk];
    for i in 0..ni {
        for j in 0..nj {
            let x = data.counts()[[i, j]];
            let o = (i * nj + j) * nk;
            let cell = &mut st.y.data[o..o + nk];
            if x == 0 {
                cell.iter_mut().for_each(|c| *c = 0);
                continue;
            }
            let mut total = 0.0;
            for k in 0..nk {
                w[k] = st.r[[i, k]] * theta[[k, j]];
                total += w[k];
            }
            if !(total > 0.0 && total.is_finite()) {
                return Err(Error::InvalidState(format!("rate at cell ({i}, {j}) is {total} but X = {x}")));
            }
            multinomial_into(x as u64, &w, total, cell, rng);
        }
    }
    Ok(())
}

/// One sweep of the seven updates: latent counts, ϑ, signatures, Z, sticks, φ, μ.
pub fn cusp_sweep(st: &mut CuspState, data: &CountMatrix, cfg: &CuspConfig, rng: &mut Rng) -> Result<()> {
    sweep_inner(st, data, cfg, rng, None)
}

/// As [`cusp_sweep`] with the allocation step replaced by fixed values of Z (1-based).
pub fn cusp_sweep_forced(
    st: &mut CuspState,
    data: &CountMatrix,
    cfg: &CuspConfig,
    rng: &mut Rng,
    forced_z: &[usize],
) -> Result<()> {
    if forced_z.len() != cfg.k || forced_z.iter().any(|&z| z == 0 || z > cfg.k) {
        return Err(Error::domain("forced Z must hold K values in 1..=K"));
    }
    sweep_inner(st, data, cfg, rng, Some(forced_z))
}

fn sweep_inner(
    st: &mut CuspState,
    data: &CountMatrix,
    cfg: &CuspConfig,
    rng: &mut Rng,
    forced_z: Option<&[usize]>,
) -> Result<()> {
    let (ni, nj) = data.counts().dim();
    let nk = cfg.k;
    latent(st, data, rng)?;
    let load = st.y.sample_totals();
    let sig = st.y.channel_totals();
    for k in 0..nk {
        for j in 0..nj {
            st.vartheta[[k, j]] = gamma(cfg.a + load[[k, j]], cfg.a + st.mu[k], rng).max(f64::MIN_POSITIVE);
        }
    }
    let mut conc = vec![0.0; ni];
    let mut col = vec![0.0; ni];
    for k in 0..nk {
        for i in 0..ni {
            conc[i] = cfg.alpha + sig[[i, k]];
        }
        dirichlet_into(&conc, &mut col, rng);
        for i in 0..ni {
            st.r[[i, k]] = col[i];
        }
    }
    let logphi: Vec<f64> = st.phi.iter().map(|p| p.ln()).collect();
    let slab_const = cfg.a0 * cfg.b0.ln() - ln_gamma(cfg.a0);
    let mut sum_vt = vec![0.0; nk];
    let mut sum_y = vec![0.0; nk];
    let mut logw = vec![0.0; nk];
    for k in 0..nk {
        sum_vt[k] = st.vartheta.row(k).sum();
        sum_y[k] = load.row(k).sum();
        match forced_z {
            Some(z) => st.z[k] = z[k],
            None => {
                let spike = sum_y[k] * cfg.mu_inf.ln() - cfg.mu_inf * sum_vt[k];
                let shp = cfg.a0 + sum_y[k];
                let slab = slab_const + ln_gamma(shp) - shp * (cfg.b0 + sum_vt[k]).ln();
                for l in 0..nk {
                    logw[l] = logphi[l] + if l <= k { spike } else { slab };
                }
                st.z[k] = draw_categorical_log(&logw, rng) + 1;
            }
        }
    }
    for l in 0..nk - 1 {
        let eq = st.z.iter().filter(|&&z| z == l + 1).count() as f64;
        let gt = st.z.iter().filter(|&&z| z > l + 1).count() as f64;
        st.v[l] = beta(1.0 + eq, cfg.alpha_pi + gt, rng);
    }
    st.v[nk - 1] = 1.0;
    st.phi = stick_weights(&st.v);
    for k in 0..nk {
        st.mu[k] = if st.is_spike(k) {
            cfg.mu_inf
        } else {
            gamma(cfg.a0 + sum_y[k], cfg.b0 + sum_vt[k], rng).max(f64::MIN_POSITIVE)
        };
    }
    Ok(())
}

/// Poisson log likelihood of the counts at the current R, Θ, without the log X! term.
pub fn cusp_log_likelihood(st: &CuspState, data: &CountMatrix) -> f64 {
    let lam = st.r.dot(&st.theta());
    let mut ll = 0.0;
    for ((i, j), &l) in lam.indexed_iter() {
        let x = data.counts()[[i, j]];
        if x > 0 {
            if l <= 0.0 {
                return f64::NEG_INFINITY;
            }
            ll += x as f64 * l.ln();
        }
        ll -= l;
    }
    ll
}

/// Retained draws of a CUSP run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CuspSamples {
    pub r: Vec<Array2<f64>>,
    pub theta: Vec<Array2<f64>>,
    pub mu: Vec<Array1<f64>>,
    pub z: Vec<Vec<usize>>,
    /// Log likelihood after every sweep.
    pub log_likelihood: Vec<f64>,
    pub retained_log_likelihood: Vec<f64>,
    pub chain_index: usize,
    pub chain_seed: u64,
    pub chains: Vec<ChainReport>,
    pub config: CuspConfig,
    pub final_state: CuspState,
}

impl CuspSamples {
    pub fn n_draws(&self) -> usize {
        self.z.len()
    }

    /// Fraction of retained draws in which factor k was spiked.
    pub fn spike_probability(&self) -> Vec<f64> {
        let nk = self.config.k;
        let n = self.n_draws() as f64;
        (0..nk)
            .map(|k| self.z.iter().filter(|z| z[k] <= k + 1).count() as f64 / n)
            .collect()
    }

    /// Most frequent active count #{k : Z_k > k} over retained draws (ties to the smaller count).
    pub fn k_star_majority(&self) -> usize {
        let nk = self.config.k;
        let mut freq = vec![0usize; nk + 1];
        for z in &self.z {
            freq[(0..nk).filter(|&k| z[k] > k + 1).count()] += 1;
        }
        let best = *freq.iter().max().unwrap_or(&0);
        freq.iter().position(|&f| f == best).unwrap_or(0)
    }

    /// Factors with posterior spike probability below `cut`, in index order.
    pub fn active_by_spike_probability(&self, cut: f64) -> Vec<usize> {
        self.spike_probability()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p < cut)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn mean_r(&self) -> Array2<f64> {
        let mut acc = Array2::zeros(self.r[0].dim());
        for x in &self.r {
            acc += x;
        }
        acc / self.r.len() as f64
    }

    pub fn mean_theta(&self) -> Array2<f64> {
        let mut acc = Array2::zeros(self.theta[0].dim());
        for x in &self.theta {
            acc += x;
        }
        acc / self.theta.len() as f64
    }

    pub fn mean_retained_log_likelihood(&self) -> f64 {
        self.retained_log_likelihood.iter().sum::<f64>() / self.retained_log_likelihood.len() as f64
    }
}

/// Runs one CUSP chain from a prior draw.
pub fn run_cusp_chain(data: &CountMatrix, cfg: &CuspConfig, sc: &SamplerConfig, chain_seed: u64) -> Result<CuspSamples> {
    sc.validate()?;
    let mut rng = Rng::seed_from_u64(chain_seed);
    let mut st = init_cusp(data, cfg, &mut rng)?;
    let keep = sc.n_retained();
    let mut out = CuspSamples {
        r: Vec::with_capacity(keep),
        theta: Vec::with_capacity(keep),
        mu: Vec::with_capacity(keep),
        z: Vec::with_capacity(keep),
        log_likelihood: Vec::with_capacity(sc.n_iter),
        retained_log_likelihood: Vec::with_capacity(keep),
        chain_index: 0,
        chain_seed,
        chains: Vec::new(),
        config: cfg.clone(),
        final_state: st.clone(),
    };
    for it in 0..sc.n_iter {
        cusp_sweep(&mut st, data, cfg, &mut rng)?;
        let ll = cusp_log_likelihood(&st, data);
        if !ll.is_finite() {
            return Err(Error::InvalidState(format!("non-finite log likelihood at sweep {it}")));
        }
        out.log_likelihood.push(ll);
        if it >= sc.burn_in && (it + 1 - sc.burn_in) % sc.thin == 0 {
            out.r.push(st.r.clone());
            out.theta.push(st.theta());
            out.mu.push(st.mu.clone());
            out.z.push(st.z.clone());
            out.retained_log_likelihood.push(ll);
        }
    }
    out.final_state = st;
    Ok(out)
}

/// Runs `n_chains` CUSP chains and keeps the one with the highest mean retained log likelihood.
pub fn run_cusp(data: &CountMatrix, cfg: &CuspConfig, sc: &SamplerConfig) -> Result<CuspSamples> {
    sc.validate()?;
    let results: Vec<Result<CuspSamples>> = (0..sc.n_chains)
        .into_par_iter()
        .map(|c| {
            run_cusp_chain(data, cfg, sc, sc.chain_seed(c)).map(|mut s| {
                s.chain_index = c;
                s
            })
        })
        .collect();
    let reports: Vec<ChainReport> = results
        .iter()
        .enumerate()
        .map(|(c, r)| ChainReport {
            index: c,
            seed: sc.chain_seed(c),
            mean_log_posterior: r.as_ref().ok().map(|s| s.mean_retained_log_likelihood()),
            error: r.as_ref().err().map(|e| e.to_string()),
        })
        .collect();
    let best = reports
        .iter()
        .filter_map(|r| r.mean_log_posterior.filter(|v| v.is_finite()).map(|v| (r.index, v)))
        .fold(None, |acc: Option<(usize, f64)>, (i, v)| match acc {
            Some((_, bv)) if bv >= v => acc,
            _ => Some((i, v)),
        });
    let Some((idx, _)) = best else {
        let msgs: Vec<String> = reports
            .iter()
            .map(|r| format!("chain {}: {}", r.index, r.error.clone().unwrap_or_else(|| "non-finite".into())))
            .collect();
        return Err(Error::Convergence(format!("all CUSP chains failed: {}", msgs.join("; "))));
    };
    let mut chosen = results.into_iter().nth(idx).expect("index in range")?;
    chosen.chains = reports;
    Ok(chosen)
}

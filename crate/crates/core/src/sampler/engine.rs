//! Gibbs updates on flat buffers.
//!
//! The engine keeps per-sweep scratch: the transposed loadings and the count
//! aggregates `Σ_j Y_ijk` and `Y_jk`, which are filled during the latent step and
//! consumed by the signature and loading steps of the same sweep.

use crate::distributions::samplers::{dirichlet_into, gamma, inv_gamma, multinomial_into};
use crate::error::{Error, Result};
use crate::model::config::FactorPrior;
use crate::model::{ChainState, CountMatrix, ModelConfig};
use crate::rng::Rng;

pub(crate) struct Engine {
    ni: usize,
    nj: usize,
    nk: usize,
    /// Nonzero cells as (i, j, X_ij).
    cells: Vec<(usize, usize, u32)>,
    /// Dirichlet base measure, I×K row-major.
    base: Vec<f64>,
    /// Loading shape per factor.
    shape: Vec<f64>,
    /// Inverse-gamma hyperprior (shape, scale) per factor.
    hyper: Vec<(f64, f64)>,
    sig_counts: Vec<f64>,
    load_counts: Vec<f64>,
    theta_t: Vec<f64>,
    w: Vec<f64>,
    conc: Vec<f64>,
    col: Vec<f64>,
}

/// Forces standard (row-major, contiguous) layout so buffers can be sliced.
pub(crate) fn normalise_layout(st: &mut ChainState) {
    if !st.r.0.is_standard_layout() {
        st.r.0 = st.r.0.as_standard_layout().into_owned();
    }
    if !st.theta.0.is_standard_layout() {
        st.theta.0 = st.theta.0.as_standard_layout().into_owned();
    }
}

impl Engine {
    pub(crate) fn new(data: &CountMatrix, config: &ModelConfig) -> Self {
        let (ni, nj) = data.counts().dim();
        let nk = config.total_factors();
        let mut cells = Vec::new();
        for i in 0..ni {
            for j in 0..nj {
                let x = data.counts()[[i, j]];
                if x > 0 {
                    cells.push((i, j, x));
                }
            }
        }
        let mut base = vec![0.0; ni * nk];
        for k in 0..nk {
            match config.factor_prior(k) {
                FactorPrior::DeNovo => (0..ni).for_each(|i| base[i * nk + k] = config.alpha),
                FactorPrior::Known { beta, s } => (0..ni).for_each(|i| base[i * nk + k] = beta * s[i]),
            }
        }
        let shape = (0..nk).map(|k| config.loading_shape(k)).collect();
        let hyper = (0..nk).map(|k| config.relevance_prior(k, nj)).collect();
        Engine {
            ni,
            nj,
            nk,
            cells,
            base,
            shape,
            hyper,
            sig_counts: vec![0.0; ni * nk],
            load_counts: vec![0.0; nk * nj],
            theta_t: vec![0.0; nj * nk],
            w: vec![0.0; nk],
            conc: vec![0.0; ni],
            col: vec![0.0; ni],
        }
    }

    pub(crate) fn dirichlet_base(&self, i: usize, k: usize) -> f64 {
        self.base[i * self.nk + k]
    }

    fn refresh_theta_t(&mut self, st: &ChainState) {
        let th = st.theta.0.as_slice().expect("standard layout");
        for k in 0..self.nk {
            for j in 0..self.nj {
                self.theta_t[j * self.nk + k] = th[k * self.nj + j];
            }
        }
    }

    /// Recomputes both count aggregates from the stored latent tensor.
    pub(crate) fn aggregate_from_y(&mut self, st: &ChainState) {
        let nk = self.nk;
        self.sig_counts.iter_mut().for_each(|v| *v = 0.0);
        self.load_counts.iter_mut().for_each(|v| *v = 0.0);
        for &(i, j, _) in &self.cells {
            let o = (i * self.nj + j) * nk;
            for k in 0..nk {
                let y = st.y.data[o + k] as f64;
                self.sig_counts[i * nk + k] += y;
                self.load_counts[k * self.nj + j] += y;
            }
        }
    }

    /// Y_ij· ~ Multinomial(X_ij, q_ij·) for every nonzero cell.
    pub(crate) fn latent(&mut self, st: &mut ChainState, rng: &mut Rng) -> Result<()> {
        self.refresh_theta_t(st);
        let nk = self.nk;
        let r = st.r.0.as_slice().expect("standard layout");
        self.sig_counts.iter_mut().for_each(|v| *v = 0.0);
        self.load_counts.iter_mut().for_each(|v| *v = 0.0);
        for &(i, j, x) in &self.cells {
            let rr = &r[i * nk..(i + 1) * nk];
            let tt = &self.theta_t[j * nk..(j + 1) * nk];
            let mut total = 0.0;
            for k in 0..nk {
                let v = rr[k] * tt[k];
                self.w[k] = v;
                total += v;
            }
            if !(total > 0.0 && total.is_finite()) {
                return Err(Error::InvalidState(format!(
                    "rate at cell ({i}, {j}) is {total} but X = {x}"
                )));
            }
            let o = (i * self.nj + j) * nk;
            let cell = &mut st.y.data[o..o + nk];
            multinomial_into(x as u64, &self.w, total, cell, rng);
            for k in 0..nk {
                let y = cell[k] as f64;
                self.sig_counts[i * nk + k] += y;
                self.load_counts[k * self.nj + j] += y;
            }
        }
        Ok(())
    }

    /// Column k ~ Dirichlet(base_·k + Σ_j Y_·jk).
    pub(crate) fn signatures(&mut self, st: &mut ChainState, rng: &mut Rng) {
        let nk = self.nk;
        let r = st.r.0.as_slice_mut().expect("standard layout");
        for k in 0..nk {
            for i in 0..self.ni {
                self.conc[i] = self.base[i * nk + k] + self.sig_counts[i * nk + k];
            }
            dirichlet_into(&self.conc, &mut self.col, rng);
            for i in 0..self.ni {
                r[i * nk + k] = self.col[i];
            }
        }
    }

    /// θ_kj ~ Gamma(a_k + Y_jk, a_k/μ_k + 1).
    pub(crate) fn loadings(&mut self, st: &mut ChainState, rng: &mut Rng) {
        let nj = self.nj;
        let mu = st.mu.0.as_slice().expect("contiguous");
        let th = st.theta.0.as_slice_mut().expect("standard layout");
        for k in 0..self.nk {
            let a = self.shape[k];
            let rate = a / mu[k] + 1.0;
            for j in 0..nj {
                let v = gamma(a + self.load_counts[k * nj + j], rate, rng);
                th[k * nj + j] = v.max(f64::MIN_POSITIVE);
            }
        }
    }

    /// μ_k ~ InvGamma(A_k + a_k J, B_k + a_k Σ_j θ_kj).
    pub(crate) fn relevance(&mut self, st: &mut ChainState, rng: &mut Rng) {
        let nj = self.nj;
        let th = st.theta.0.as_slice().expect("standard layout");
        let jf = nj as f64;
        for k in 0..self.nk {
            let a = self.shape[k];
            let (h_shape, h_scale) = self.hyper[k];
            let s: f64 = th[k * nj..(k + 1) * nj].iter().sum();
            let v = inv_gamma(h_shape + a * jf, h_scale + a * s, rng);
            st.mu.0[k] = v.max(f64::MIN_POSITIVE);
        }
    }

    pub(crate) fn sweep(&mut self, st: &mut ChainState, rng: &mut Rng) -> Result<()> {
        self.latent(st, rng)?;
        self.signatures(st, rng);
        self.loadings(st, rng);
        self.relevance(st, rng);
        st.iteration += 1;
        Ok(())
    }

    /// Same value as [`crate::model::log_posterior`], computed on the flat buffers.
    pub(crate) fn log_posterior(&mut self, st: &ChainState, data: &CountMatrix) -> f64 {
        self.refresh_theta_t(st);
        let (ni, nj, nk) = (self.ni, self.nj, self.nk);
        let r = st.r.0.as_slice().expect("standard layout");
        let th = st.theta.0.as_slice().expect("standard layout");
        let x = data.counts();
        let mut lp = 0.0;
        for i in 0..ni {
            let rr = &r[i * nk..(i + 1) * nk];
            for j in 0..nj {
                let tt = &self.theta_t[j * nk..(j + 1) * nk];
                let q: f64 = rr.iter().zip(tt).map(|(a, b)| a * b).sum();
                let xv = x[[i, j]];
                if xv > 0 {
                    if q <= 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    lp += xv as f64 * q.ln();
                }
                lp -= q;
            }
        }
        for k in 0..nk {
            for i in 0..ni {
                let v = r[i * nk + k];
                if v > 0.0 {
                    lp += (self.base[i * nk + k] - 1.0) * v.ln();
                }
            }
            let a = self.shape[k];
            let m = st.mu.0[k];
            let lam = (a / m).ln();
            for j in 0..nj {
                let t = th[k * nj + j];
                lp += a * lam + (a - 1.0) * t.ln() - a * t / m;
            }
            let (hs, hc) = self.hyper[k];
            lp += -(hs + 1.0) * m.ln() - hc / m;
        }
        lp
    }
}

/// Resamples the latent counts given R and Θ.
pub fn gibbs_step_latent(state: &mut ChainState, data: &CountMatrix, config: &ModelConfig, rng: &mut Rng) -> Result<()> {
    normalise_layout(state);
    state.y.data.iter_mut().for_each(|v| *v = 0);
    Engine::new(data, config).latent(state, rng)
}

/// Resamples every signature column from its Dirichlet full conditional.
pub fn gibbs_step_signatures(state: &mut ChainState, data: &CountMatrix, config: &ModelConfig, rng: &mut Rng) {
    normalise_layout(state);
    let mut e = Engine::new(data, config);
    e.aggregate_from_y(state);
    e.signatures(state, rng);
}

/// Resamples every loading from its gamma full conditional.
pub fn gibbs_step_loadings(state: &mut ChainState, data: &CountMatrix, config: &ModelConfig, rng: &mut Rng) {
    normalise_layout(state);
    let mut e = Engine::new(data, config);
    e.aggregate_from_y(state);
    e.loadings(state, rng);
}

/// Resamples every relevance weight from its inverse-gamma full conditional.
pub fn gibbs_step_relevance(state: &mut ChainState, data: &CountMatrix, config: &ModelConfig, rng: &mut Rng) {
    normalise_layout(state);
    Engine::new(data, config).relevance(state, rng);
}

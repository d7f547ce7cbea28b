//! Synthetic count matrices with known signatures and loadings.

use crate::distributions::samplers::{dirichlet_into, gamma, poisson};
use crate::error::{Error, Result};
use crate::io::{indel_fixture, numbered, sbs_fixture, Catalog};
use crate::model::{CountMatrix, SignatureMatrix};
use crate::rng::Rng;
use ndarray::{s, Array2};
use serde::{Deserialize, Serialize};

/// Catalog signatures used as known truth in the SBS regime.
pub const SBS_PRESET: [&str; 4] = ["synSBS1", "synSBS2", "synSBS5", "synSBS13"];
/// Catalog signatures used as known truth in the indel regime.
pub const INDEL_PRESET: [&str; 4] = ["synID1", "synID2", "synID8", "synID9"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Sbs,
    Indel,
}

/// Generative settings for one synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    /// Overdispersion; 0 gives Poisson counts.
    pub tau: f64,
    pub n_samples: usize,
    pub n_channels: usize,
    /// Known signatures and their labels (channels × K⁰_pre).
    pub pre_signatures: Option<SignatureMatrix>,
    pub pre_labels: Vec<String>,
    pub channel_labels: Option<Vec<String>>,
    pub k_new: usize,
    pub dirichlet_new: f64,
    pub loading_scale_shape: f64,
    pub loading_scale_rate: f64,
    pub loading_indiv_shape: f64,
    pub loading_indiv_rate: f64,
}

impl SimulationSpec {
    fn from_catalog(cat: Catalog, tau: f64, n_samples: usize, k_new: usize) -> Self {
        SimulationSpec {
            tau,
            n_samples,
            n_channels: cat.channels.len(),
            pre_signatures: Some(cat.signatures),
            pre_labels: cat.labels,
            channel_labels: Some(cat.channels),
            k_new,
            dirichlet_new: 0.25,
            loading_scale_shape: 100.0,
            loading_scale_rate: 1.0,
            loading_indiv_shape: 0.5,
            loading_indiv_rate: 0.5,
        }
    }

    /// 96 channels, four bundled catalog signatures, new signatures ~ Dirichlet(0.25),
    /// loading scales ~ Gamma(100, 1).
    pub fn sbs(tau: f64, n_samples: usize, k_new: usize) -> Self {
        let cat = sbs_fixture().subset(&SBS_PRESET).expect("preset in fixture");
        Self::from_catalog(cat, tau, n_samples, k_new)
    }

    /// 83 channels, four bundled indel signatures, new signatures ~ Dirichlet(0.05),
    /// loading scales ~ Gamma(50, 1).
    pub fn indel(tau: f64, n_samples: usize, k_new: usize) -> Self {
        let cat = indel_fixture().subset(&INDEL_PRESET).expect("preset in fixture");
        SimulationSpec {
            dirichlet_new: 0.05,
            loading_scale_shape: 50.0,
            ..Self::from_catalog(cat, tau, n_samples, k_new)
        }
    }

    pub fn regime(regime: Regime, tau: f64, n_samples: usize, k_new: usize) -> Self {
        match regime {
            Regime::Sbs => Self::sbs(tau, n_samples, k_new),
            Regime::Indel => Self::indel(tau, n_samples, k_new),
        }
    }

    /// Only de novo signatures, over `n_channels` unlabelled channels.
    pub fn de_novo(tau: f64, n_channels: usize, n_samples: usize, k_new: usize) -> Self {
        SimulationSpec {
            tau,
            n_samples,
            n_channels,
            pre_signatures: None,
            pre_labels: Vec::new(),
            channel_labels: None,
            k_new,
            dirichlet_new: 0.25,
            loading_scale_shape: 100.0,
            loading_scale_rate: 1.0,
            loading_indiv_shape: 0.5,
            loading_indiv_rate: 0.5,
        }
    }

    pub fn k_pre(&self) -> usize {
        self.pre_signatures.as_ref().map_or(0, |s| s.n_factors())
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::domain("tau must be nonnegative"));
        }
        if self.n_samples == 0 || self.n_channels == 0 {
            return Err(Error::domain("need at least one sample and one channel"));
        }
        if self.k_pre() + self.k_new == 0 {
            return Err(Error::domain("need at least one true signature"));
        }
        if ![
            self.dirichlet_new,
            self.loading_scale_shape,
            self.loading_scale_rate,
            self.loading_indiv_shape,
            self.loading_indiv_rate,
        ]
        .into_iter()
        .all(pos)
        {
            return Err(Error::domain("Dirichlet and gamma parameters must be positive"));
        }
        if let Some(s) = &self.pre_signatures {
            if s.n_channels() != self.n_channels || self.pre_labels.len() != s.n_factors() {
                return Err(Error::Dimension("known signatures do not match the channel count or labels".into()));
            }
        }
        if let Some(c) = &self.channel_labels {
            if c.len() != self.n_channels {
                return Err(Error::Dimension("channel label count".into()));
            }
        }
        Ok(())
    }
}

/// Counts together with the parameters that generated them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedDataset {
    pub counts: CountMatrix,
    /// channels × K⁰, known signatures first.
    pub r: Array2<f64>,
    /// K⁰ × samples.
    pub theta: Array2<f64>,
    /// channels × samples intensity R⁰Θ⁰.
    pub lambda: Array2<f64>,
    pub factor_labels: Vec<String>,
    pub k_pre: usize,
}

/// One count with mean `lambda` and variance `lambda (1 + tau lambda)`.
///
/// For τ > 0 this is the gamma–Poisson mixture with rate ~ Gamma(1/τ, 1/(τλ)).
pub fn draw_count(lambda: f64, tau: f64, rng: &mut Rng) -> u64 {
    if !(lambda > 0.0) {
        return 0;
    }
    if tau == 0.0 {
        return poisson(lambda, rng);
    }
    let rate = gamma(1.0 / tau, 1.0 / (tau * lambda), rng);
    poisson(rate, rng)
}

/// Draws signatures, loadings and counts.
///
/// Draw order: new signatures, loading scales w_k, individual loadings ξ_kj, counts.
pub fn simulate_dataset(spec: &SimulationSpec, rng: &mut Rng) -> Result<SimulatedDataset> {
    spec.validate()?;
    let (ni, nj) = (spec.n_channels, spec.n_samples);
    let kp = spec.k_pre();
    let k0 = kp + spec.k_new;
    let mut r = Array2::zeros((ni, k0));
    if let Some(pre) = &spec.pre_signatures {
        r.slice_mut(s![.., ..kp]).assign(pre.as_array());
    }
    let conc = vec![spec.dirichlet_new; ni];
    let mut col = vec![0.0; ni];
    for k in kp..k0 {
        dirichlet_into(&conc, &mut col, rng);
        for i in 0..ni {
            r[[i, k]] = col[i];
        }
    }
    let w: Vec<f64> = (0..k0)
        .map(|_| gamma(spec.loading_scale_shape, spec.loading_scale_rate, rng))
        .collect();
    let mut theta = Array2::zeros((k0, nj));
    for k in 0..k0 {
        for j in 0..nj {
            theta[[k, j]] = w[k] * gamma(spec.loading_indiv_shape, spec.loading_indiv_rate, rng);
        }
    }
    let lambda = r.dot(&theta);
    let mut x = Array2::zeros((ni, nj));
    for ((i, j), &l) in lambda.indexed_iter() {
        let c = draw_count(l, spec.tau, rng);
        x[[i, j]] = u32::try_from(c)
            .map_err(|_| Error::Convergence(format!("simulated count {c} at ({i}, {j}) overflows")))?;
    }
    let channels = spec.channel_labels.clone().unwrap_or_else(|| numbered("c", ni));
    let counts = CountMatrix::new(x, channels, numbered("S", nj))?;
    let mut factor_labels = spec.pre_labels.clone();
    factor_labels.extend(numbered("new", spec.k_new));
    Ok(SimulatedDataset {
        counts,
        r,
        theta,
        lambda,
        factor_labels,
        k_pre: kp,
    })
}

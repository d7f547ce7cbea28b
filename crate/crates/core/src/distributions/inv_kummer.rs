//! The inverse Kummer distribution.
//!
//! Density on μ > 0:
//!
//! ```text
//! π(μ) = μ^{−(λ−γ)−1} (1 + μ/δ)^{−γ} e^{−β/μ} / [δ^{γ−λ} Γ(λ) U(λ, λ+1−γ, β/δ)]
//! ```
//!
//! With `t = δ/μ` the normaliser becomes `δ^{γ−λ} ∫ t^{λ−1}(1+t)^{−γ}e^{−(β/δ)t} dt`, so
//! moments are ratios of [`log_kummer_integral`] values sharing the same `(1+t)` exponent.

use super::quad::{find_mode, sigmoid, softplus};
use super::special::log_kummer_integral;
use crate::error::{Error, Result};
use crate::rng::Rng;
use serde::{Deserialize, Serialize};

/// Parameters (λ, β, γ, δ) of the inverse Kummer law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvKummerParams {
    pub lambda: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl InvKummerParams {
    pub fn new(lambda: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let p = InvKummerParams {
            lambda,
            beta,
            gamma,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x > 0.0 && x.is_finite();
        if !ok(self.lambda) || !ok(self.beta) || !ok(self.delta) || !self.gamma.is_finite() {
            return Err(Error::domain(format!(
                "inverse Kummer requires lambda, beta, delta > 0 and finite gamma, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Log of the normalising constant `δ^{γ−λ} Γ(λ) U(λ, λ+1−γ, β/δ)`.
    pub fn log_normaliser(&self) -> Result<f64> {
        self.validate()?;
        let z = self.beta / self.delta;
        Ok((self.gamma - self.lambda) * self.delta.ln()
            + log_kummer_integral(self.lambda, self.lambda + 1.0 - self.gamma, z)?)
    }

    /// Unnormalised log density of `v = ln μ`.
    #[inline]
    fn log_kernel_v(&self, v: f64) -> f64 {
        -(self.lambda - self.gamma) * v - self.gamma * softplus(v - self.delta.ln()) - self.beta * (-v).exp()
    }

    #[inline]
    fn dlog_kernel_v(&self, v: f64) -> f64 {
        -(self.lambda - self.gamma) - self.gamma * sigmoid(v - self.delta.ln()) + self.beta * (-v).exp()
    }
}

/// Log density of the inverse Kummer law at `mu`.
pub fn inv_kummer_log_pdf(mu: f64, params: &InvKummerParams) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::domain(format!("inverse Kummer density needs mu > 0, got {mu}")));
    }
    let lz = params.log_normaliser()?;
    let p = params;
    Ok(-(p.lambda - p.gamma + 1.0) * mu.ln() - p.gamma * (mu / p.delta).ln_1p() - p.beta / mu - lz)
}

/// Raw moment `E[μ^m]`, defined for `m < λ`.
pub fn inv_kummer_moment(m: u32, params: &InvKummerParams) -> Result<f64> {
    Ok(inv_kummer_log_moment(m as f64, params)?.exp())
}

/// Log of `E[μ^m]` for real `m < λ` (negative orders included).
pub fn inv_kummer_log_moment(m: f64, params: &InvKummerParams) -> Result<f64> {
    params.validate()?;
    let p = params;
    if !(m < p.lambda) {
        return Err(Error::domain(format!(
            "moment of order {m} does not exist for lambda = {}",
            p.lambda
        )));
    }
    let z = p.beta / p.delta;
    let num = log_kummer_integral(p.lambda - m, p.lambda - m + 1.0 - p.gamma, z)?;
    let den = log_kummer_integral(p.lambda, p.lambda + 1.0 - p.gamma, z)?;
    Ok(m * p.delta.ln() + num - den)
}

/// Mean and variance computed from the first two moments.
pub fn inv_kummer_mean_var(params: &InvKummerParams) -> Result<(f64, f64)> {
    let m1 = inv_kummer_moment(1, params)?;
    let m2 = inv_kummer_moment(2, params)?;
    Ok((m1, m2 - m1 * m1))
}

const INITIAL_NODES: usize = 4096;
const MAX_NODES: usize = 1 << 20;
const CDF_TOL: f64 = 1e-6;
const GRID_DROP: f64 = 40.0;

/// Tabulated CDF of an inverse Kummer law on a uniform grid in `ln μ`.
///
/// Node count starts at 4096 and doubles until the CDF at the old nodes moves by
/// less than 1e−6. Draws and quantiles interpolate the CDF linearly.
#[derive(Debug, Clone)]
pub struct InvKummerSampler {
    v0: f64,
    h: f64,
    cdf: Vec<f64>,
}

impl InvKummerSampler {
    pub fn new(params: &InvKummerParams) -> Result<Self> {
        params.validate()?;
        let p = *params;
        // inverse-gamma mode in ln μ as a starting guess
        let start = (p.beta / p.lambda).ln().clamp(-700.0, 700.0);
        let mode = find_mode(&|v| p.dlog_kernel_v(v), start)?;
        let gm = p.log_kernel_v(mode);
        let reach = |dir: f64| -> Result<f64> {
            let mut d = 1e-3;
            while p.log_kernel_v(mode + dir * d) > gm - GRID_DROP {
                d *= 2.0;
                if d > 1e4 {
                    return Err(Error::Convergence("inverse Kummer tail does not decay".into()));
                }
            }
            Ok(mode + dir * d)
        };
        let lo = reach(-1.0)?;
        let hi = reach(1.0)?;
        let mut coarse = Self::tabulate(&p, lo, hi, gm, INITIAL_NODES);
        let mut n = INITIAL_NODES;
        loop {
            if 2 * n > MAX_NODES {
                return Err(Error::Convergence(format!(
                    "inverse Kummer grid exceeded {MAX_NODES} nodes"
                )));
            }
            let fine = Self::tabulate(&p, lo, hi, gm, 2 * n);
            let diff = coarse
                .cdf
                .iter()
                .enumerate()
                .map(|(i, c)| (c - fine.cdf[2 * i]).abs())
                .fold(0.0, f64::max);
            coarse = fine;
            n *= 2;
            if diff < CDF_TOL {
                return Ok(coarse);
            }
        }
    }

    fn tabulate(p: &InvKummerParams, lo: f64, hi: f64, gm: f64, n: usize) -> Self {
        let h = (hi - lo) / n as f64;
        let dens: Vec<f64> = (0..=n)
            .map(|i| (p.log_kernel_v(lo + i as f64 * h) - gm).exp())
            .collect();
        let mut cdf = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in 0..n {
            acc += 0.5 * (dens[i] + dens[i + 1]);
            cdf.push(acc);
        }
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        InvKummerSampler { v0: lo, h, cdf }
    }

    /// Value of μ at cumulative probability `q` in [0, 1].
    pub fn quantile(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        // first index with cdf > q
        let idx = self.cdf.partition_point(|&c| c <= q);
        let i = idx.saturating_sub(1).min(self.cdf.len() - 2);
        let (c0, c1) = (self.cdf[i], self.cdf[i + 1]);
        let frac = if c1 > c0 { ((q - c0) / (c1 - c0)).clamp(0.0, 1.0) } else { 0.0 };
        (self.v0 + (i as f64 + frac) * self.h).exp()
    }

    /// Tabulated CDF at `mu`.
    pub fn cdf(&self, mu: f64) -> f64 {
        if !(mu > 0.0) {
            return 0.0;
        }
        let x = (mu.ln() - self.v0) / self.h;
        if x <= 0.0 {
            return 0.0;
        }
        let i = x.floor() as usize;
        if i + 1 >= self.cdf.len() {
            return 1.0;
        }
        let f = x - i as f64;
        self.cdf[i] + f * (self.cdf[i + 1] - self.cdf[i])
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        self.quantile(rng.uniform_open())
    }

    pub fn nodes(&self) -> usize {
        self.cdf.len()
    }
}

/// One draw from the inverse Kummer law. Builds the CDF table on every call;
/// reuse an [`InvKummerSampler`] for repeated draws.
pub fn inv_kummer_sample(params: &InvKummerParams, rng: &mut Rng) -> Result<f64> {
    Ok(InvKummerSampler::new(params)?.sample(rng))
}

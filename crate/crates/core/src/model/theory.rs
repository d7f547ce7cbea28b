//! Closed-form posterior laws given the latent counts.

use super::config::{HyperpriorMode, ModelConfig};
use crate::distributions::{log_gauss_2f1, log_kummer_integral, InvKummerParams};
use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;

/// Parameters of the inverse Kummer law of μ_k given the latent counts.
///
/// Compressive: `(2aJ + 1, εaJ, JȲ_k + aJ, a)`. Fixed strength: `(a0 + Ja, b0, Ja + JȲ_k, a)`.
pub fn posterior_mu_params(ybar_k: f64, n_samples: usize, config: &ModelConfig) -> Result<InvKummerParams> {
    posterior_params_for_shape(config.a, config.epsilon, ybar_k, n_samples, config.hyperprior)
}

/// As [`posterior_mu_params`] with an explicit loading shape (b for catalog-anchored factors).
pub fn posterior_params_for_shape(
    a: f64,
    epsilon: f64,
    ybar_k: f64,
    n_samples: usize,
    mode: HyperpriorMode,
) -> Result<InvKummerParams> {
    if !(ybar_k >= 0.0) || n_samples == 0 {
        return Err(Error::domain("posterior parameters need Ybar >= 0 and J >= 1"));
    }
    let j = n_samples as f64;
    match mode {
        HyperpriorMode::Compressive => InvKummerParams::new(2.0 * a * j + 1.0, epsilon * a * j, j * ybar_k + a * j, a),
        HyperpriorMode::FixedStrength { a0, b0 } => InvKummerParams::new(a0 + j * a, b0, j * a + j * ybar_k, a),
    }
}

/// Posterior mean of θ_kj given the latent counts under the compressive hyperprior.
///
/// `(a + Y_jk) · U(2aJ+1, J(a−Ȳ_k)+1, εJ) / U(2aJ+1, J(a−Ȳ_k)+2, εJ)`, evaluated as a
/// difference of log integrals sharing the first argument.
pub fn expected_loading(a: f64, epsilon: f64, n_samples: usize, ybar_k: f64, y_jk: u64) -> Result<f64> {
    if !(a > 0.0) || !(epsilon > 0.0) || n_samples == 0 || !(ybar_k >= 0.0) {
        return Err(Error::domain("expected_loading needs a, epsilon > 0, J >= 1, Ybar >= 0"));
    }
    let j = n_samples as f64;
    let lam = 2.0 * a * j + 1.0;
    let b = j * (a - ybar_k);
    let z = epsilon * j;
    let ratio = log_kummer_integral(lam, b + 1.0, z)? - log_kummer_integral(lam, b + 2.0, z)?;
    Ok((a + y_jk as f64) * ratio.exp())
}

/// Marginal probability that a single cell allocates `y` counts to a factor with weight `mu_k`,
/// after integrating out the signature entry and the loading.
pub fn marginal_latent_pmf(y: u64, mu_k: f64, a: f64, alpha: f64, n_channels: usize) -> Result<f64> {
    Ok(log_marginal_latent_pmf(y, mu_k, a, alpha, n_channels)?.exp())
}

/// Log of [`marginal_latent_pmf`]:
/// `y ln(μ/a) + ln (a)_y + ln (α)_y − ln y! − ln (αI)_y + ln ₂F₁(y+a, y+α; y+αI; −μ/a)`.
pub fn log_marginal_latent_pmf(y: u64, mu_k: f64, a: f64, alpha: f64, n_channels: usize) -> Result<f64> {
    if n_channels < 2 {
        return Err(Error::domain("marginal pmf needs at least two channels"));
    }
    if !(mu_k > 0.0) || !(a > 0.0) || !(alpha > 0.0) {
        return Err(Error::domain("marginal pmf needs positive mu, a and alpha"));
    }
    let yf = y as f64;
    let ai = alpha * n_channels as f64;
    let lpoch = |x: f64| ln_gamma(x + yf) - ln_gamma(x);
    let head = if y == 0 { 0.0 } else { yf * (mu_k / a).ln() };
    Ok(head + lpoch(a) + lpoch(alpha) - ln_gamma(yf + 1.0) - lpoch(ai)
        + log_gauss_2f1(yf + a, yf + alpha, yf + ai, -mu_k / a)?)
}

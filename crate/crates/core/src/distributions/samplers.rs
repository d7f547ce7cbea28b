//! Primitive random variate generators used by the Gibbs steps.
//!
//! The checked `sample_*` functions validate their arguments. The unchecked
//! helpers are for hot loops where arguments are positive by construction.

use crate::error::{Error, Result};
use crate::rng::Rng;
use rand::distr::Distribution;
use rand_distr::{Beta, Binomial, Gamma, Poisson};

/// Gamma(shape, rate) draw without argument checks.
#[inline]
pub fn gamma(shape: f64, rate: f64, rng: &mut Rng) -> f64 {
    Gamma::new(shape, 1.0 / rate)
        .expect("gamma parameters are positive")
        .sample(rng)
}

/// Log of a unit-rate gamma draw, accurate for very small shapes.
///
/// For shape < 1 uses `G(a) = G(a+1) · U^{1/a}` and keeps the result in log
/// domain so that draws far below the smallest double are not lost.
#[inline]
pub fn log_gamma_unit(shape: f64, rng: &mut Rng) -> f64 {
    if shape >= 1.0 {
        gamma(shape, 1.0, rng).ln()
    } else {
        let g = gamma(shape + 1.0, 1.0, rng);
        g.ln() + rng.uniform_open().ln() / shape
    }
}

/// Gamma draw with shape and rate validated.
pub fn sample_gamma(shape: f64, rate: f64, rng: &mut Rng) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite() && rate > 0.0 && rate.is_finite()) {
        return Err(Error::domain(format!("gamma needs positive shape and rate, got ({shape}, {rate})")));
    }
    Ok(gamma(shape, rate, rng))
}

/// Inverse-gamma draw parameterised by shape and scale (mean `scale / (shape − 1)`).
pub fn sample_inv_gamma(shape: f64, scale: f64, rng: &mut Rng) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite() && scale > 0.0 && scale.is_finite()) {
        return Err(Error::domain(format!("inverse gamma needs positive shape and scale, got ({shape}, {scale})")));
    }
    Ok(inv_gamma(shape, scale, rng))
}

#[inline]
pub fn inv_gamma(shape: f64, scale: f64, rng: &mut Rng) -> f64 {
    scale / gamma(shape, 1.0, rng)
}

/// Dirichlet draw into `out`. Zero concentrations yield exact zeros.
///
/// At least one concentration must be positive. Coordinates whose gamma draw
/// underflows relative to the largest one are left at zero.
pub fn dirichlet_into(conc: &[f64], out: &mut [f64], rng: &mut Rng) {
    debug_assert_eq!(conc.len(), out.len());
    let mut max = f64::NEG_INFINITY;
    for (o, &c) in out.iter_mut().zip(conc) {
        *o = if c > 0.0 { log_gamma_unit(c, rng) } else { f64::NEG_INFINITY };
        max = max.max(*o);
    }
    let mut sum = 0.0;
    for o in out.iter_mut() {
        *o = (*o - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

/// Dirichlet draw with validated concentrations.
pub fn sample_dirichlet(conc: &[f64], rng: &mut Rng) -> Result<Vec<f64>> {
    if conc.is_empty() || conc.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
        return Err(Error::domain("dirichlet needs a nonempty vector of positive concentrations"));
    }
    let mut out = vec![0.0; conc.len()];
    dirichlet_into(conc, &mut out, rng);
    Ok(out)
}

const CATEGORICAL_LIMIT: u64 = 64;

/// Multinomial draw with unnormalised nonnegative `weights` summing to `total`.
///
/// Small `n` uses repeated categorical draws; larger `n` uses sequential
/// conditional binomials. `out` is overwritten.
pub fn multinomial_into(n: u64, weights: &[f64], total: f64, out: &mut [u32], rng: &mut Rng) {
    out.iter_mut().for_each(|o| *o = 0);
    if n == 0 {
        return;
    }
    let k = weights.len();
    if n <= CATEGORICAL_LIMIT {
        for _ in 0..n {
            let mut u = rng.uniform() * total;
            let mut idx = k - 1;
            for (i, &w) in weights.iter().enumerate() {
                if u < w {
                    idx = i;
                    break;
                }
                u -= w;
            }
            // guard against landing on a zero-weight tail through rounding
            while weights[idx] <= 0.0 && idx > 0 {
                idx -= 1;
            }
            out[idx] += 1;
        }
        return;
    }
    let mut left = n;
    let mut mass = total;
    for i in 0..k {
        if left == 0 {
            break;
        }
        let w = weights[i];
        if i == k - 1 || w >= mass {
            out[i] = left as u32;
            break;
        }
        if w <= 0.0 {
            continue;
        }
        let p = (w / mass).clamp(0.0, 1.0);
        let draw = Binomial::new(left, p).expect("valid binomial").sample(rng);
        out[i] = draw as u32;
        left -= draw;
        mass -= w;
    }
}

/// Multinomial draw with validated probabilities.
pub fn sample_multinomial(n: u64, probs: &[f64], rng: &mut Rng) -> Result<Vec<u64>> {
    if probs.is_empty() || probs.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
        return Err(Error::domain("multinomial needs nonnegative probabilities"));
    }
    let s: f64 = probs.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!("multinomial probabilities sum to {s}")));
    }
    if n > u32::MAX as u64 {
        return Err(Error::domain("multinomial trial count exceeds 2^32 - 1"));
    }
    let mut out = vec![0u32; probs.len()];
    multinomial_into(n, probs, s, &mut out, rng);
    Ok(out.into_iter().map(u64::from).collect())
}

/// Poisson draw; zero for a zero mean.
#[inline]
pub fn poisson(mean: f64, rng: &mut Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive poisson mean").sample(rng) as u64
}

/// Beta(a, b) draw without argument checks.
#[inline]
pub fn beta(a: f64, b: f64, rng: &mut Rng) -> f64 {
    Beta::new(a, b).expect("positive beta parameters").sample(rng)
}

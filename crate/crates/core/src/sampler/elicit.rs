//! Choice of the Dirichlet concentration for catalog-anchored signatures.

use crate::distributions::samplers::dirichlet_into;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, Rng};
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Outcome of a concentration search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Elicited {
    pub beta: f64,
    /// Median cosine between the prior centre and draws at the chosen value.
    pub median_cosine: f64,
    /// Set when the centre is a vertex of the simplex, so every β gives cosine 1.
    pub degenerate: bool,
}

/// `n` values evenly spaced on a log scale between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Default search grid: 1000 log-spaced values from 10 to 5000.
pub fn default_beta_grid() -> Vec<f64> {
    log_grid(10.0, 5000.0, 1000)
}

/// Median cosine similarity between `s` and `n_draws` draws from Dirichlet(β s).
pub fn median_cosine(s: &[f64], beta: f64, n_draws: usize, rng: &mut Rng) -> f64 {
    let conc: Vec<f64> = s.iter().map(|&v| beta * v).collect();
    let ns = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut draw = vec![0.0; s.len()];
    let mut cos = Vec::with_capacity(n_draws);
    for _ in 0..n_draws {
        dirichlet_into(&conc, &mut draw, rng);
        let dot: f64 = draw.iter().zip(s).map(|(a, b)| a * b).sum();
        let nd = draw.iter().map(|v| v * v).sum::<f64>().sqrt();
        cos.push(dot / (nd * ns));
    }
    cos.sort_by(f64::total_cmp);
    let n = cos.len();
    if n % 2 == 1 {
        cos[n / 2]
    } else {
        0.5 * (cos[n / 2 - 1] + cos[n / 2])
    }
}

/// Grid value of β whose median prior cosine to `s` is closest to `target_cos`.
///
/// Each grid point uses its own stream seeded from one draw of `rng`, so the
/// result does not depend on how the grid is split across threads.
pub fn elicit_beta(s: &[f64], target_cos: f64, n_draws: usize, grid: &[f64], rng: &mut Rng) -> Result<Elicited> {
    if grid.is_empty() || grid.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::domain("beta grid must be nonempty and positive"));
    }
    if !(target_cos > 0.0 && target_cos < 1.0) || n_draws == 0 {
        return Err(Error::domain("target cosine must lie in (0, 1) and n_draws >= 1"));
    }
    let total: f64 = s.iter().sum();
    if s.iter().any(|&v| !(v >= 0.0)) || (total - 1.0).abs() > 1e-6 {
        return Err(Error::domain("signature must lie on the simplex"));
    }
    let base = rng.next_u64();
    let smallest = grid.iter().cloned().fold(f64::INFINITY, f64::min);
    if s.iter().any(|&v| v >= 1.0 - 1e-15) {
        return Ok(Elicited {
            beta: smallest,
            median_cosine: 1.0,
            degenerate: true,
        });
    }
    let meds: Vec<f64> = grid
        .par_iter()
        .enumerate()
        .map(|(g, &b)| median_cosine(s, b, n_draws, &mut Rng::seed_from_u64(derive_seed(base, g as u64))))
        .collect();
    let mut best = 0;
    for g in 1..grid.len() {
        let (dg, db) = ((meds[g] - target_cos).abs(), (meds[best] - target_cos).abs());
        if dg < db || (dg == db && grid[g] < grid[best]) {
            best = g;
        }
    }
    Ok(Elicited {
        beta: grid[best],
        median_cosine: meds[best],
        degenerate: false,
    })
}

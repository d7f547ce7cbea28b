//! Burn-in relabelling of active factors onto catalog slots.

use super::engine::normalise_layout;
use crate::model::{ChainState, ModelConfig};
use crate::selection::matching::{assignment_max, cosine_matrix};
use ndarray::{Array1, Axis};

/// Factors with μ_k at or below this multiple of ε are treated as switched off.
pub const COMPRESSED_MULTIPLE: f64 = 5.0;
/// Minimum cosine for a factor to be moved into a catalog slot.
pub const REMATCH_MIN_COSINE: f64 = 0.9;

/// Permutation (new slot → old factor) that moves each active factor onto the catalog slot it
/// best matches. Inactive factors are not matched; matched pairs below
/// [`REMATCH_MIN_COSINE`] are ignored; everything else keeps its slot where possible.
pub fn rematch_permutation(state: &ChainState, config: &ModelConfig) -> Vec<usize> {
    let nk = state.n_factors();
    let identity: Vec<usize> = (0..nk).collect();
    let Some(inf) = &config.informative else {
        return identity;
    };
    let k_pre = inf.k_pre();
    let active: Vec<usize> = (0..nk)
        .filter(|&k| state.mu.0[k] > COMPRESSED_MULTIPLE * config.epsilon)
        .collect();
    if active.is_empty() || k_pre == 0 {
        return identity;
    }
    let cand = state.r.0.select(Axis(1), &active);
    let sim = cosine_matrix(cand.view(), inf.s.0.view());
    // (old factor, catalog slot)
    let mut pairs = Vec::new();
    if active.len() <= k_pre {
        for (a, slot) in assignment_max(sim.view()).into_iter().enumerate() {
            pairs.push((active[a], slot, sim[[a, slot]]));
        }
    } else {
        for (slot, a) in assignment_max(sim.t()).into_iter().enumerate() {
            pairs.push((active[a], slot, sim[[a, slot]]));
        }
    }
    let mut perm: Vec<Option<usize>> = vec![None; nk];
    let mut placed = vec![false; nk];
    for &(old, slot, cos) in &pairs {
        if cos >= REMATCH_MIN_COSINE {
            perm[slot] = Some(old);
            placed[old] = true;
        }
    }
    // unplaced factors keep their own slot when it is free, then fill the rest in order
    for k in 0..nk {
        if !placed[k] && perm[k].is_none() {
            perm[k] = Some(k);
            placed[k] = true;
        }
    }
    let mut leftovers = (0..nk).filter(|&k| !placed[k]);
    perm.into_iter()
        .map(|p| p.unwrap_or_else(|| leftovers.next().expect("bijection")))
        .collect()
}

/// Applies `perm` (new slot → old factor) to R columns, Θ rows, μ and the factor axis of Y.
pub fn permute_state(state: &mut ChainState, perm: &[usize]) {
    state.r.0 = state.r.0.select(Axis(1), perm);
    state.theta.0 = state.theta.0.select(Axis(0), perm);
    state.mu.0 = Array1::from_iter(perm.iter().map(|&p| state.mu.0[p]));
    state.y.permute_factors(perm);
    normalise_layout(state);
}

/// Performs the catalog rematch in place; returns whether anything moved.
pub fn rematch_to_catalog(state: &mut ChainState, config: &ModelConfig) -> bool {
    let perm = rematch_permutation(state, config);
    if perm.iter().enumerate().all(|(i, &p)| i == p) {
        return false;
    }
    permute_state(state, &perm);
    true
}

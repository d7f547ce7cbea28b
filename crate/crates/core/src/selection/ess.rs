//! Effective sample size of a scalar trace.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ess {
    pub ess: f64,
    /// Set for traces with zero variance; `ess` is then the trace length.
    pub degenerate: bool,
}

/// ESS with Geyer's initial monotone positive sequence truncation of the autocorrelations.
pub fn effective_sample_size(trace: &[f64]) -> Ess {
    let n = trace.len();
    let nf = n as f64;
    if n < 4 {
        return Ess { ess: nf, degenerate: true };
    }
    let mean = trace.iter().sum::<f64>() / nf;
    let dev: Vec<f64> = trace.iter().map(|x| x - mean).collect();
    let acov = |lag: usize| dev[..n - lag].iter().zip(&dev[lag..]).map(|(a, b)| a * b).sum::<f64>() / nf;
    let c0 = acov(0);
    if !(c0 > 0.0) || !c0.is_finite() {
        return Ess { ess: nf, degenerate: true };
    }
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut m = 0;
    while 2 * m + 1 < n {
        let pair = (acov(2 * m) + acov(2 * m + 1)) / c0;
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev);
        sum += pair;
        prev = pair;
        m += 1;
    }
    // caps the estimate at n·log10(n) for antithetic traces
    let tau = (2.0 * sum - 1.0).max(1.0 / nf.log10().max(1.0));
    Ess {
        ess: nf / tau,
        degenerate: false,
    }
}

/// Average ESS over a set of traces, skipping degenerate ones; `None` if all are degenerate.
pub fn mean_ess<'a>(traces: impl IntoIterator<Item = &'a [f64]>) -> (Option<f64>, usize) {
    let mut total = 0.0;
    let mut used = 0usize;
    let mut degenerate = 0usize;
    for t in traces {
        let e = effective_sample_size(t);
        if e.degenerate {
            degenerate += 1;
        } else {
            total += e.ess;
            used += 1;
        }
    }
    ((used > 0).then(|| total / used as f64), degenerate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn iid_trace() {
        let mut rng = Rng::seed_from_u64(11);
        let t: Vec<f64> = (0..4000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let e = effective_sample_size(&t);
        assert!(!e.degenerate);
        assert!((3000.0..=5000.0).contains(&e.ess), "{}", e.ess);
    }

    #[test]
    fn ar1_trace() {
        let mut rng = Rng::seed_from_u64(12);
        let phi: f64 = 0.9;
        let mut x = 0.0;
        let mut t = Vec::with_capacity(10_000);
        for _ in 0..10_000 {
            let z: f64 = StandardNormal.sample(&mut rng);
            x = phi * x + (1.0 - phi * phi).sqrt() * z;
            t.push(x);
        }
        let want = 1e4 * (1.0 - phi) / (1.0 + phi);
        let e = effective_sample_size(&t);
        assert!((e.ess - want).abs() < 0.3 * want, "{} vs {want}", e.ess);
    }

    #[test]
    fn constant_trace() {
        let e = effective_sample_size(&[2.5; 100]);
        assert!(e.degenerate);
        assert_eq!(e.ess, 100.0);
    }
}

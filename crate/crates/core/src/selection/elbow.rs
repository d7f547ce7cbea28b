//! Posterior location of μ_k as a function of the average allocated count.

use crate::distributions::{inv_kummer_moment, InvKummerSampler};
use crate::error::Result;
use crate::model::{posterior_params_for_shape, HyperpriorMode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElbowPoint {
    #[serde(rename = "J")]
    pub j: usize,
    pub ybar: f64,
    pub mean: f64,
    pub q10: f64,
    pub q90: f64,
}

/// Posterior mean and 10%/90% quantiles of μ_k given Ȳ_k for each value in `ybar_grid`.
pub fn elbow_curve(a: f64, epsilon: f64, n_samples: usize, ybar_grid: &[f64], mode: HyperpriorMode) -> Result<Vec<ElbowPoint>> {
    ybar_grid
        .par_iter()
        .map(|&y| {
            let p = posterior_params_for_shape(a, epsilon, y, n_samples, mode)?;
            let mean = inv_kummer_moment(1, &p)?;
            let s = InvKummerSampler::new(&p)?;
            Ok(ElbowPoint {
                j: n_samples,
                ybar: y,
                mean,
                q10: s.quantile(0.1),
                q90: s.quantile(0.9),
            })
        })
        .collect()
}

/// `points` evenly spaced values from 0 to `max` inclusive.
pub fn linear_grid(max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| max * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::concentration_point;

    #[test]
    fn mean_near_concentration_point() {
        let c = elbow_curve(1.0, 0.001, 100, &[10.0], HyperpriorMode::Compressive).unwrap();
        let star = concentration_point(0.001, 10.0, 1.0).unwrap();
        assert!((c[0].mean - star).abs() < 0.1 * star, "{} vs {star}", c[0].mean);
        assert!(c[0].q10 < c[0].mean && c[0].mean < c[0].q90);
    }

    #[test]
    fn zero_counts_stay_below_threshold() {
        for j in [10, 100, 1000] {
            let c = elbow_curve(1.0, 0.001, j, &[0.0], HyperpriorMode::Compressive).unwrap();
            assert!(c[0].mean < 0.005);
        }
    }

    #[test]
    fn band_narrows_with_j() {
        let w = |j| {
            let c = elbow_curve(1.0, 0.001, j, &[5.0], HyperpriorMode::Compressive).unwrap()[0];
            c.q90 - c.q10
        };
        let (a, b, c) = (w(10), w(100), w(1000));
        assert!(a > b && b > c);
    }

    #[test]
    fn fixed_strength_tracks_diagonal() {
        let mode = HyperpriorMode::FixedStrength { a0: 11.0, b0: 0.01 };
        let m: Vec<f64> = [10, 100, 1000]
            .iter()
            .map(|&j| elbow_curve(1.0, 0.001, j, &[5.0], mode).unwrap()[0].mean)
            .collect();
        assert!((m[2] - 5.0).abs() < (m[0] - 5.0).abs());
        assert!((m[2] - 5.0).abs() < 0.05 * 5.0, "{m:?}");
    }

    #[test]
    fn grid_shape() {
        let g = linear_grid(10.0, 50);
        assert_eq!(g.len(), 50);
        assert_eq!((g[0], g[49]), (0.0, 10.0));
    }
}

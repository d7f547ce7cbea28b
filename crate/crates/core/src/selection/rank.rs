//! Rank estimation by thresholding posterior relevance, and posterior summaries.

use super::matching::cosine_matrix;
use crate::error::{Error, Result};
use crate::model::SignatureMatrix;
use crate::sampler::{quantile_sorted, PosteriorSamples};
use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

/// Default threshold multiple C in the rule mean(μ_k) > Cε.
pub const DEFAULT_THRESHOLD_C: f64 = 5.0;

/// Estimated rank and the factors that make it up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEstimate {
    pub k_star: usize,
    /// Active factor indices, largest posterior mean μ first.
    pub active: Vec<usize>,
    pub mu_mean: Vec<f64>,
    pub threshold: f64,
}

/// K* = #{k : mean μ_k > Cε} from per-factor posterior means of μ.
pub fn rank_from_means(mu_mean: &[f64], epsilon: f64, c: f64) -> Result<RankEstimate> {
    if !(c > 1.0) || !(epsilon > 0.0) {
        return Err(Error::domain(format!("threshold needs C > 1 and epsilon > 0, got C={c}")));
    }
    let threshold = c * epsilon;
    let mut active: Vec<usize> = (0..mu_mean.len()).filter(|&k| mu_mean[k] > threshold).collect();
    active.sort_by(|&x, &y| mu_mean[y].total_cmp(&mu_mean[x]).then(x.cmp(&y)));
    Ok(RankEstimate {
        k_star: active.len(),
        active,
        mu_mean: mu_mean.to_vec(),
        threshold,
    })
}

/// Rank estimate from the retained μ draws of a chain.
pub fn estimate_rank(samples: &PosteriorSamples, epsilon: f64, c: f64) -> Result<RankEstimate> {
    if samples.n_draws() == 0 {
        return Err(Error::InvalidState("no retained draws".into()));
    }
    rank_from_means(samples.mean_mu().as_slice().expect("contiguous"), epsilon, c)
}

/// Best catalog match of one estimated factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMatch {
    pub label: String,
    pub cosine: f64,
}

/// Posterior summary of a fit restricted to its active factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    #[serde(rename = "K_star")]
    pub k_star: usize,
    pub active: Vec<usize>,
    pub epsilon: f64,
    pub threshold_c: f64,
    /// Per-factor posterior mean of μ over all factors.
    pub mu_mean: Vec<f64>,
    pub mu_q05: Vec<f64>,
    pub mu_q95: Vec<f64>,
    /// I×K* posterior mean signatures, columns in `active` order.
    pub r_mean: Vec<Vec<f64>>,
    pub r_lower: Vec<Vec<f64>>,
    pub r_upper: Vec<Vec<f64>>,
    /// K*×J posterior mean loadings.
    pub theta_mean: Vec<Vec<f64>>,
    pub theta_lower: Vec<Vec<f64>>,
    pub theta_upper: Vec<Vec<f64>>,
    /// Best catalog match of each active factor when a reference is supplied.
    pub matches: Option<Vec<LabelMatch>>,
    /// Catalog label of each active factor that sits in a catalog-anchored slot.
    pub prior_labels: Vec<Option<String>>,
}

fn rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.outer_iter().map(|r| r.to_vec()).collect()
}

impl FitSummary {
    pub fn r_mean_array(&self) -> Array2<f64> {
        from_rows(&self.r_mean)
    }

    pub fn theta_mean_array(&self) -> Array2<f64> {
        from_rows(&self.theta_mean)
    }
}

/// Rebuilds a matrix from nested rows; an empty list gives a 0×0 matrix.
pub fn from_rows(rows: &[Vec<f64>]) -> Array2<f64> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, |r| r.len());
    Array2::from_shape_fn((nr, nc), |(i, j)| rows[i][j])
}

/// Builds a [`FitSummary`]: rank, posterior means and 90% equal-tailed intervals of the active
/// factors, and (with `reference`) the best-matching catalog label of each active factor.
pub fn summarize(
    samples: &PosteriorSamples,
    epsilon: f64,
    c: f64,
    reference: Option<(&SignatureMatrix, &[String])>,
) -> Result<FitSummary> {
    let rank = estimate_rank(samples, epsilon, c)?;
    let act = &rank.active;
    let nk = samples.n_factors();
    let mut mu_q05 = Vec::with_capacity(nk);
    let mut mu_q95 = Vec::with_capacity(nk);
    for k in 0..nk {
        let mut t = samples.mu_trace(k);
        t.sort_by(f64::total_cmp);
        mu_q05.push(quantile_sorted(&t, 0.05));
        mu_q95.push(quantile_sorted(&t, 0.95));
    }
    let r_mean = samples.mean_r().select(Axis(1), act);
    let theta_mean = samples.mean_theta().select(Axis(0), act);
    let (rl, ru) = samples.r_quantiles(0.05, 0.95);
    let (tl, tu) = samples.theta_quantiles(0.05, 0.95);
    let matches = match reference {
        Some((s, labels)) => {
            if s.n_channels() != r_mean.nrows() || labels.len() != s.n_factors() {
                return Err(Error::Dimension("reference catalog does not match the fit".into()));
            }
            let sim = cosine_matrix(r_mean.view(), s.as_array().view());
            Some(
                sim.outer_iter()
                    .map(|row| {
                        let (best, cos) = row
                            .iter()
                            .enumerate()
                            .fold((0, f64::NEG_INFINITY), |acc, (q, &v)| if v > acc.1 { (q, v) } else { acc });
                        LabelMatch {
                            label: labels[best].clone(),
                            cosine: cos,
                        }
                    })
                    .collect(),
            )
        }
        None => None,
    };
    let prior_labels = act
        .iter()
        .map(|&k| {
            samples
                .model
                .informative
                .as_ref()
                .filter(|inf| k < inf.k_pre())
                .map(|inf| inf.labels[k].clone())
        })
        .collect();
    Ok(FitSummary {
        k_star: rank.k_star,
        active: act.clone(),
        epsilon,
        threshold_c: c,
        mu_mean: rank.mu_mean,
        mu_q05,
        mu_q95,
        r_mean: rows(&r_mean),
        r_lower: rows(&rl.select(Axis(1), act)),
        r_upper: rows(&ru.select(Axis(1), act)),
        theta_mean: rows(&theta_mean),
        theta_lower: rows(&tl.select(Axis(0), act)),
        theta_upper: rows(&tu.select(Axis(0), act)),
        matches,
        prior_labels,
    })
}

/// Posterior mean intensity R̂Θ̂ over the active factors of a summary.
pub fn fitted_intensity(summary: &FitSummary, n_channels: usize, n_samples: usize) -> Array2<f64> {
    if summary.k_star == 0 {
        return Array2::zeros((n_channels, n_samples));
    }
    summary.r_mean_array().dot(&summary.theta_mean_array())
}

/// Mean of each retained-draw vector, used for summaries built outside a chain.
pub fn mean_vector(draws: &[Array1<f64>]) -> Array1<f64> {
    let mut acc = Array1::zeros(draws[0].len());
    for d in draws {
        acc += d;
    }
    acc / draws.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_rule() {
        let r = rank_from_means(&[2.1, 0.0011, 0.003, 0.8], 0.001, 5.0).unwrap();
        assert_eq!(r.k_star, 2);
        assert_eq!(r.active, vec![0, 3]);
    }

    #[test]
    fn empty_and_boundary() {
        assert_eq!(rank_from_means(&[0.001, 0.004], 0.001, 5.0).unwrap().k_star, 0);
        assert_eq!(rank_from_means(&[0.005], 0.001, 5.0).unwrap().k_star, 0);
        assert!(rank_from_means(&[1.0], 0.001, 1.0).is_err());
    }

    #[test]
    fn order_invariance() {
        let m = [0.3, 0.0001, 2.0, 0.02];
        let p = [2usize, 0, 3, 1];
        let a = rank_from_means(&m, 0.001, 5.0).unwrap();
        let b = rank_from_means(&p.map(|i| m[i]), 0.001, 5.0).unwrap();
        assert_eq!(a.k_star, b.k_star);
        let back: Vec<usize> = b.active.iter().map(|&k| p[k]).collect();
        assert_eq!(back, a.active);
    }
}

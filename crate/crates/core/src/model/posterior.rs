//! Unnormalised log joint density.

use super::config::{ChainState, FactorPrior, ModelConfig};
use super::types::CountMatrix;
use crate::error::Result;

/// Log of the joint density of data and parameters up to additive constants.
///
/// Included terms:
/// * Poisson: `Σ_ij [−Q_ij + X_ij ln Q_ij]` with `Q = RΘ`;
/// * Dirichlet: `Σ_ik (c_ik − 1) ln r_ik` with `c_ik = α` or `β_k s_ik`;
/// * Gamma loadings: `Σ_kj [a_k ln(a_k/μ_k) + (a_k − 1) ln θ_kj − a_k θ_kj/μ_k]`;
/// * inverse-gamma relevance: `Σ_k [−(A_k + 1) ln μ_k − B_k/μ_k]`.
///
/// Dropped constants: `−Σ ln X_ij!`, the Dirichlet normalisers `ln Γ(Σc) − Σ ln Γ(c)`,
/// the gamma normalisers `−ln Γ(a_k)` and the inverse-gamma normalisers
/// `A_k ln B_k − ln Γ(A_k)`. Entries with `r_ik = 0` are skipped in the Dirichlet
/// term. The result is `−∞` if some `X_ij > 0` has `Q_ij = 0`.
pub fn log_posterior(state: &ChainState, data: &CountMatrix, config: &ModelConfig) -> Result<f64> {
    let (ni, nj) = data.counts().dim();
    state.check_dims(config, ni, nj)?;
    let r = &state.r.0;
    let th = &state.theta.0;
    let mu = &state.mu.0;
    let nk = r.ncols();

    let mut lp = 0.0;
    for i in 0..ni {
        for j in 0..nj {
            let q: f64 = (0..nk).map(|k| r[[i, k]] * th[[k, j]]).sum();
            let x = data.counts()[[i, j]];
            if x > 0 {
                if q <= 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                lp += x as f64 * q.ln();
            }
            lp -= q;
        }
    }

    for k in 0..nk {
        let prior = config.factor_prior(k);
        for i in 0..ni {
            let rik = r[[i, k]];
            if rik > 0.0 {
                let c = match prior {
                    FactorPrior::DeNovo => config.alpha,
                    FactorPrior::Known { beta, s } => beta * s[i],
                };
                lp += (c - 1.0) * rik.ln();
            }
        }
        let a = config.loading_shape(k);
        let m = mu[k];
        for j in 0..nj {
            let t = th[[k, j]];
            lp += a * (a / m).ln() + (a - 1.0) * t.ln() - a * t / m;
        }
        let (shape, scale) = config.relevance_prior(k, nj);
        lp += -(shape + 1.0) * m.ln() - scale / m;
    }
    Ok(lp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::types::*;
    use ndarray::array;

    fn single(x: u32, r: f64, th: f64, mu: f64) -> (ChainState, CountMatrix) {
        let data = CountMatrix::from_array(array![[x]]).unwrap();
        let state = ChainState {
            r: SignatureMatrix::new(array![[r]]).unwrap(),
            theta: LoadingMatrix::new(array![[th]]).unwrap(),
            mu: RelevanceVector::new(array![mu]).unwrap(),
            y: LatentCountTensor::from_fn(&data, 1, |_, _, _| x).unwrap(),
            k_pre: 0,
            iteration: 0,
        };
        (state, data)
    }

    #[test]
    fn hand_computed_single_cell() {
        let cfg = ModelConfig { k: 1, ..Default::default() };
        let e: f64 = 0.001;
        let (state, data) = single(0, 1.0, e, e);
        let got = log_posterior(&state, &data, &cfg).unwrap();
        // poisson −ε; dirichlet 0; gamma a ln(a/μ) + 0 − aθ/μ; inverse gamma −(J+2) ln μ − εJ/μ
        let want = -e + ((1.0 / e).ln() - 1.0) + (-3.0 * e.ln() - 1.0);
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn adding_a_count_changes_only_the_poisson_term() {
        let cfg = ModelConfig { k: 1, ..Default::default() };
        let (s0, d0) = single(2, 1.0, 3.5, 2.0);
        let (s1, d1) = single(3, 1.0, 3.5, 2.0);
        let diff = log_posterior(&s1, &d1, &cfg).unwrap() - log_posterior(&s0, &d0, &cfg).unwrap();
        assert!((diff - 3.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_rate_with_positive_count() {
        let cfg = ModelConfig { k: 2, ..Default::default() };
        let data = CountMatrix::from_array(array![[3u32], [0]]).unwrap();
        let state = ChainState {
            r: SignatureMatrix::new(array![[0.0, 0.0], [1.0, 1.0]]).unwrap(),
            theta: LoadingMatrix::new(array![[1.0], [1.0]]).unwrap(),
            mu: RelevanceVector::new(array![1.0, 1.0]).unwrap(),
            y: LatentCountTensor::from_fn(&data, 2, |i, _, k| if i == 0 && k == 0 { 3 } else { 0 }).unwrap(),
            k_pre: 0,
            iteration: 0,
        };
        assert_eq!(log_posterior(&state, &data, &cfg).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn fixed_strength_uses_its_own_hyperprior() {
        let e: f64 = 0.001;
        let comp = ModelConfig { k: 1, ..Default::default() };
        let fixed = ModelConfig {
            hyperprior: crate::model::HyperpriorMode::FixedStrength { a0: 2.0, b0: e },
            ..comp.clone()
        };
        // with J = 1 and a = 1 the compressive hyperprior is InvGamma(2, ε)
        let (s, d) = single(4, 1.0, 2.0, 0.7);
        assert_eq!(log_posterior(&s, &d, &comp).unwrap(), log_posterior(&s, &d, &fixed).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let cfg = ModelConfig { k: 2, ..Default::default() };
        let (s, d) = single(1, 1.0, 1.0, 1.0);
        assert!(log_posterior(&s, &d, &cfg).is_err());
    }
}

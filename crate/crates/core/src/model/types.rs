//! Data containers for counts, signatures, loadings, relevance weights and latent counts.

use crate::error::{Error, Result};
use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

/// Column-sum tolerance accepted as already stochastic.
pub const STOCHASTIC_TOL: f64 = 1e-9;
/// Largest column-sum deviation that is silently renormalised on ingest.
pub const RENORMALISE_TOL: f64 = 1e-6;

/// Observed I×J mutation counts with channel and sample labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountMatrix {
    counts: Array2<u32>,
    channels: Vec<String>,
    samples: Vec<String>,
}

impl CountMatrix {
    pub fn new(counts: Array2<u32>, channels: Vec<String>, samples: Vec<String>) -> Result<Self> {
        let (i, j) = counts.dim();
        if i == 0 || j == 0 {
            return Err(Error::Dimension(format!("count matrix must be nonempty, got {i}x{j}")));
        }
        if channels.len() != i || samples.len() != j {
            return Err(Error::Dimension(format!(
                "{} channel and {} sample labels for a {i}x{j} matrix",
                channels.len(),
                samples.len()
            )));
        }
        Ok(CountMatrix {
            counts,
            channels,
            samples,
        })
    }

    /// Counts with generated labels `c1..cI` and `s1..sJ`.
    pub fn from_array(counts: Array2<u32>) -> Result<Self> {
        let (i, j) = counts.dim();
        let channels = (1..=i).map(|n| format!("c{n}")).collect();
        let samples = (1..=j).map(|n| format!("s{n}")).collect();
        Self::new(counts, channels, samples)
    }

    pub fn n_channels(&self) -> usize {
        self.counts.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.counts.ncols()
    }

    pub fn counts(&self) -> &Array2<u32> {
        &self.counts
    }

    pub fn channels(&self) -> &[String] {
        &self.channels
    }

    pub fn samples(&self) -> &[String] {
        &self.samples
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&x| x as u64).sum()
    }

    pub fn to_f64(&self) -> Array2<f64> {
        self.counts.mapv(f64::from)
    }
}

fn check_stochastic(m: &Array2<f64>, what: &str, tol: f64) -> Result<()> {
    for (k, col) in m.axis_iter(Axis(1)).enumerate() {
        if col.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::domain(format!("{what} column {k} has a negative or non-finite entry")));
        }
        let s = col.sum();
        if (s - 1.0).abs() > tol {
            return Err(Error::domain(format!("{what} column {k} sums to {s}")));
        }
    }
    Ok(())
}

/// I×K matrix whose columns are probability vectors over channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureMatrix(pub(crate) Array2<f64>);

impl SignatureMatrix {
    pub fn new(m: Array2<f64>) -> Result<Self> {
        check_stochastic(&m, "signature", STOCHASTIC_TOL)?;
        Ok(SignatureMatrix(m))
    }

    /// Accepts columns within 1e−6 of unit sum and rescales them; rejects larger deviations.
    pub fn renormalised(mut m: Array2<f64>) -> Result<Self> {
        check_stochastic(&m, "signature", RENORMALISE_TOL)?;
        for mut col in m.axis_iter_mut(Axis(1)) {
            let s = col.sum();
            col.mapv_inplace(|x| x / s);
        }
        Ok(SignatureMatrix(m))
    }

    pub fn n_channels(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_factors(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_array(self) -> Array2<f64> {
        self.0
    }

    pub fn column(&self, k: usize) -> ArrayView1<'_, f64> {
        self.0.column(k)
    }

    pub fn select(&self, cols: &[usize]) -> SignatureMatrix {
        SignatureMatrix(self.0.select(Axis(1), cols))
    }
}

/// K×J matrix of strictly positive loadings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadingMatrix(pub(crate) Array2<f64>);

impl LoadingMatrix {
    pub fn new(m: Array2<f64>) -> Result<Self> {
        if m.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::domain("loadings must be strictly positive and finite"));
        }
        Ok(LoadingMatrix(m))
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_array(self) -> Array2<f64> {
        self.0
    }
}

/// K strictly positive relevance weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceVector(pub(crate) Array1<f64>);

impl RelevanceVector {
    pub fn new(v: Array1<f64>) -> Result<Self> {
        if v.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::domain("relevance weights must be strictly positive and finite"));
        }
        Ok(RelevanceVector(v))
    }

    pub fn as_array(&self) -> &Array1<f64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// I×J×K latent allocation of counts to factors, stored with k varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentCountTensor {
    pub(crate) dims: (usize, usize, usize),
    pub(crate) data: Vec<u32>,
}

impl LatentCountTensor {
    pub fn zeros(i: usize, j: usize, k: usize) -> Self {
        LatentCountTensor {
            dims: (i, j, k),
            data: vec![0; i * j * k],
        }
    }

    /// Builds a tensor from a closure and checks that it sums to `x` over factors.
    pub fn from_fn(x: &CountMatrix, k: usize, f: impl Fn(usize, usize, usize) -> u32) -> Result<Self> {
        let (ni, nj) = (x.n_channels(), x.n_samples());
        let mut t = Self::zeros(ni, nj, k);
        for i in 0..ni {
            for j in 0..nj {
                for kk in 0..k {
                    t.data[(i * nj + j) * k + kk] = f(i, j, kk);
                }
            }
        }
        t.check_sums(x)?;
        Ok(t)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> u32 {
        let (_, nj, nk) = self.dims;
        self.data[(i * nj + j) * nk + k]
    }

    /// Allocation vector of cell (i, j) across factors.
    pub fn cell(&self, i: usize, j: usize) -> &[u32] {
        let (_, nj, nk) = self.dims;
        let o = (i * nj + j) * nk;
        &self.data[o..o + nk]
    }

    /// Verifies Σ_k Y_ijk = X_ij for every cell.
    pub fn check_sums(&self, x: &CountMatrix) -> Result<()> {
        let (ni, nj, _) = self.dims;
        if (ni, nj) != x.counts().dim() {
            return Err(Error::Dimension("latent tensor does not match the count matrix".into()));
        }
        for i in 0..ni {
            for j in 0..nj {
                let s: u64 = self.cell(i, j).iter().map(|&v| v as u64).sum();
                if s != x.counts()[[i, j]] as u64 {
                    return Err(Error::InvalidState(format!(
                        "latent counts at ({i}, {j}) sum to {s}, expected {}",
                        x.counts()[[i, j]]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Y_jk = Σ_i Y_ijk as a K×J matrix.
    pub fn sample_totals(&self) -> Array2<f64> {
        let (ni, nj, nk) = self.dims;
        let mut out = Array2::zeros((nk, nj));
        for i in 0..ni {
            for j in 0..nj {
                for (k, &v) in self.cell(i, j).iter().enumerate() {
                    out[[k, j]] += v as f64;
                }
            }
        }
        out
    }

    /// Σ_j Y_ijk as an I×K matrix.
    pub fn channel_totals(&self) -> Array2<f64> {
        let (ni, nj, nk) = self.dims;
        let mut out = Array2::zeros((ni, nk));
        for i in 0..ni {
            for j in 0..nj {
                for (k, &v) in self.cell(i, j).iter().enumerate() {
                    out[[i, k]] += v as f64;
                }
            }
        }
        out
    }

    /// Ȳ_k = (1/J) Σ_j Y_jk.
    pub fn mean_per_sample(&self) -> Array1<f64> {
        let nj = self.dims.1 as f64;
        self.sample_totals().sum_axis(Axis(1)) / nj
    }

    /// Reorders the factor axis so that new factor `k` is old factor `perm[k]`.
    pub fn permute_factors(&mut self, perm: &[usize]) {
        let nk = self.dims.2;
        let mut buf = vec![0u32; nk];
        for cell in self.data.chunks_mut(nk) {
            for (k, &p) in perm.iter().enumerate() {
                buf[k] = cell[p];
            }
            cell.copy_from_slice(&buf);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn count_matrix_label_checks() {
        let x = array![[1u32, 2], [3, 4]];
        assert!(CountMatrix::new(x.clone(), vec!["a".into()], vec!["s".into(), "t".into()]).is_err());
        let c = CountMatrix::from_array(x).unwrap();
        assert_eq!(c.total(), 10);
        assert_eq!(c.channels()[1], "c2");
    }

    #[test]
    fn signature_tolerances() {
        assert!(SignatureMatrix::new(array![[0.5], [0.5]]).is_ok());
        assert!(SignatureMatrix::new(array![[0.5], [0.5 + 1e-7]]).is_err());
        let r = SignatureMatrix::renormalised(array![[0.5], [0.5 + 1e-7]]).unwrap();
        assert!((r.column(0).sum() - 1.0).abs() < 1e-15);
        assert!(SignatureMatrix::renormalised(array![[0.5], [0.6]]).is_err());
        assert!(SignatureMatrix::new(array![[1.5], [-0.5]]).is_err());
    }

    #[test]
    fn positivity_checks() {
        assert!(LoadingMatrix::new(array![[1.0, 0.0]]).is_err());
        assert!(RelevanceVector::new(array![1.0, -1.0]).is_err());
        assert!(RelevanceVector::new(array![1.0, 2.0]).is_ok());
    }

    #[test]
    fn latent_aggregates() {
        let x = CountMatrix::from_array(array![[3u32, 0], [1, 2]]).unwrap();
        let y = LatentCountTensor::from_fn(&x, 2, |i, j, k| {
            let v = x.counts()[[i, j]];
            if k == 0 {
                v / 2
            } else {
                v - v / 2
            }
        })
        .unwrap();
        assert_eq!(y.sample_totals(), array![[1.0, 1.0], [3.0, 1.0]]);
        assert_eq!(y.channel_totals(), array![[1.0, 2.0], [1.0, 2.0]]);
        assert_eq!(y.mean_per_sample(), array![1.0, 2.0]);
        let bad = LatentCountTensor::zeros(2, 2, 2);
        assert!(matches!(bad.check_sums(&x), Err(Error::InvalidState(_))));
    }

    #[test]
    fn permute_factor_axis() {
        let x = CountMatrix::from_array(array![[6u32]]).unwrap();
        let mut y = LatentCountTensor::from_fn(&x, 3, |_, _, k| k as u32 + 1).unwrap();
        y.permute_factors(&[2, 0, 1]);
        assert_eq!(y.cell(0, 0), &[3, 1, 2]);
    }
}

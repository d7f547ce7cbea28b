//! Recovery metrics against a known truth.

use super::matching::{cosine_matrix, hungarian_match, pad_columns};
use crate::error::{Error, Result};
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

/// Precision, sensitivity and F1 at a cosine cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub precision: f64,
    pub sensitivity: f64,
    #[serde(rename = "F1")]
    pub f1: f64,
    pub cutoff: f64,
    /// Set when no signatures were estimated; precision is then reported as 0.
    pub empty_estimate: bool,
}

/// Root mean squared errors of a point estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmseReport {
    pub rmse_counts: f64,
    pub rmse_lambda: f64,
    #[serde(rename = "rmse_R")]
    pub rmse_r: f64,
    #[serde(rename = "rmse_Theta")]
    pub rmse_theta: f64,
}

/// Full comparison of a fit against the truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(flatten)]
    pub detection: Detection,
    #[serde(flatten)]
    pub rmse: RmseReport,
    #[serde(rename = "K_star")]
    pub k_star: usize,
    #[serde(rename = "K_true")]
    pub k_true: usize,
}

pub fn f1_score(p: f64, s: f64) -> f64 {
    if p + s > 0.0 {
        2.0 * p * s / (p + s)
    } else {
        0.0
    }
}

/// Max-cosine precision and sensitivity (not one-to-one).
pub fn precision_sensitivity(estimated: ArrayView2<'_, f64>, truth: ArrayView2<'_, f64>, cutoff: f64) -> Result<Detection> {
    if estimated.nrows() != truth.nrows() {
        return Err(Error::Dimension(format!(
            "estimated has {} channels, truth {}",
            estimated.nrows(),
            truth.nrows()
        )));
    }
    let (ke, kt) = (estimated.ncols(), truth.ncols());
    if ke == 0 {
        return Ok(Detection {
            precision: 0.0,
            sensitivity: 0.0,
            f1: 0.0,
            cutoff,
            empty_estimate: true,
        });
    }
    let sim = cosine_matrix(estimated, truth);
    let hit = |v: f64| v >= cutoff;
    let precision = (0..ke).filter(|&e| sim.row(e).iter().any(|&v| hit(v))).count() as f64 / ke as f64;
    let sensitivity = if kt == 0 {
        0.0
    } else {
        (0..kt).filter(|&t| sim.column(t).iter().any(|&v| hit(v))).count() as f64 / kt as f64
    };
    Ok(Detection {
        precision,
        sensitivity,
        f1: f1_score(precision, sensitivity),
        cutoff,
        empty_estimate: false,
    })
}

fn rmse(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    let ss: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
    (ss / n as f64).sqrt()
}

fn check_dim(name: &str, a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!("{name}: {a:?} vs {b:?}")));
    }
    Ok(())
}

/// RMSE of the counts and the true intensity against λ̂ = R̂Θ̂, and of R̂, Θ̂ against the truth
/// after one-to-one matching with zero padding of the smaller side.
pub fn rmse_suite(
    counts: ArrayView2<'_, f64>,
    r_hat: ArrayView2<'_, f64>,
    theta_hat: ArrayView2<'_, f64>,
    r_true: ArrayView2<'_, f64>,
    theta_true: ArrayView2<'_, f64>,
    lambda_true: ArrayView2<'_, f64>,
) -> Result<RmseReport> {
    let (ni, nj) = counts.dim();
    check_dim("truth lambda", lambda_true.dim(), (ni, nj))?;
    check_dim("truth Theta", theta_true.dim(), (r_true.ncols(), nj))?;
    check_dim("truth R", (r_true.nrows(), 0), (ni, 0))?;
    let k_hat = r_hat.ncols();
    let lam_hat = if k_hat == 0 {
        Array2::zeros((ni, nj))
    } else {
        check_dim("estimated Theta", theta_hat.dim(), (k_hat, nj))?;
        check_dim("estimated R", (r_hat.nrows(), 0), (ni, 0))?;
        r_hat.dot(&theta_hat)
    };
    let kmax = k_hat.max(r_true.ncols());
    let (r_al, t_al) = if k_hat == 0 {
        (Array2::zeros((ni, kmax)), Array2::zeros((kmax, nj)))
    } else {
        let m = hungarian_match(r_hat, r_true)?;
        (m.align_columns(r_hat), m.align_rows(theta_hat))
    };
    let r_ref = pad_columns(r_true, kmax);
    let t_ref = pad_columns(theta_true.t(), kmax).reversed_axes();
    Ok(RmseReport {
        rmse_counts: rmse(counts, lam_hat.view()),
        rmse_lambda: rmse(lambda_true, lam_hat.view()),
        rmse_r: rmse(r_al.view(), r_ref.view()),
        rmse_theta: rmse(t_al.view(), t_ref.view()),
    })
}

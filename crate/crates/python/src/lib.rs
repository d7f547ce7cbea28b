//! Python bindings: special functions, simulation and fitting.
//!
//! Matrices cross the boundary as nested lists (row-major).

use compnmf_core::distributions as dist;
use compnmf_core::model::{posterior_mu_params, CountMatrix, HyperpriorMode, ModelConfig};
use compnmf_core::sampler::{run_inference, SamplerConfig};
use compnmf_core::selection::{self, summarize};
use compnmf_core::simulate::{simulate_dataset, Regime, SimulationSpec};
use compnmf_core::{Error, Rng};
use ndarray::Array2;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::DataFormat { .. } | Error::Dimension(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.outer_iter().map(|r| r.to_vec()).collect()
}

fn matrix(v: Vec<Vec<f64>>) -> PyResult<Array2<f64>> {
    let nc = v.first().map_or(0, Vec::len);
    if v.iter().any(|r| r.len() != nc) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Ok(Array2::from_shape_fn((v.len(), nc), |(i, j)| v[i][j]))
}

fn hyperprior(a0: Option<f64>, b0: Option<f64>) -> PyResult<HyperpriorMode> {
    match (a0, b0) {
        (None, None) => Ok(HyperpriorMode::Compressive),
        (Some(a0), Some(b0)) => Ok(HyperpriorMode::FixedStrength { a0, b0 }),
        _ => Err(PyValueError::new_err("give both a0 and b0 or neither")),
    }
}

/// log U(a, b, z), Tricomi's confluent hypergeometric function.
#[pyfunction]
fn log_kummer_u(a: f64, b: f64, z: f64) -> PyResult<f64> {
    dist::log_kummer_u(a, b, z).map_err(to_py)
}

/// log ₂F₁(a, b; c; z) for c > b > 0 and z < 1.
#[pyfunction]
fn log_gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> PyResult<f64> {
    dist::log_gauss_2f1(a, b, c, z).map_err(to_py)
}

/// m-th raw moment of the inverse Kummer law.
#[pyfunction]
fn inv_kummer_moment(m: u32, lam: f64, beta: f64, gamma: f64, delta: f64) -> PyResult<f64> {
    let p = dist::InvKummerParams::new(lam, beta, gamma, delta).map_err(to_py)?;
    dist::inv_kummer_moment(m, &p).map_err(to_py)
}

/// Large-sample concentration point of μ_k given the average allocated count.
#[pyfunction]
fn concentration_point(epsilon: f64, y: f64, a: f64) -> PyResult<f64> {
    dist::concentration_point(epsilon, y, a).map_err(to_py)
}

/// Posterior mean of a loading given the latent counts.
#[pyfunction]
#[pyo3(name = "expected_loading")]
fn expected_loading_py(a: f64, epsilon: f64, n_samples: usize, ybar: f64, y_jk: u64) -> PyResult<f64> {
    compnmf_core::model::expected_loading(a, epsilon, n_samples, ybar, y_jk).map_err(to_py)
}

/// Posterior mean and variance of μ_k given Ȳ_k under the default model.
#[pyfunction]
#[pyo3(signature = (ybar, n_samples, epsilon=0.001, a=1.0))]
fn relevance_posterior(ybar: f64, n_samples: usize, epsilon: f64, a: f64) -> PyResult<(f64, f64)> {
    let cfg = ModelConfig {
        epsilon,
        a,
        ..Default::default()
    };
    let p = posterior_mu_params(ybar, n_samples, &cfg).map_err(to_py)?;
    dist::inv_kummer_mean_var(&p).map_err(to_py)
}

/// Rows of (J, ybar, mean, q10, q90).
#[pyfunction]
#[pyo3(signature = (n_samples, ybar_grid, a=1.0, epsilon=0.001, a0=None, b0=None))]
fn elbow_curve(
    n_samples: usize,
    ybar_grid: Vec<f64>,
    a: f64,
    epsilon: f64,
    a0: Option<f64>,
    b0: Option<f64>,
) -> PyResult<Vec<(usize, f64, f64, f64, f64)>> {
    let pts = selection::elbow_curve(a, epsilon, n_samples, &ybar_grid, hyperprior(a0, b0)?).map_err(to_py)?;
    Ok(pts.into_iter().map(|p| (p.j, p.ybar, p.mean, p.q10, p.q90)).collect())
}

#[pyfunction]
fn cosine_similarity(u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    selection::cosine_similarity(ndarray::ArrayView1::from(&u), ndarray::ArrayView1::from(&v)).map_err(to_py)
}

/// Simulated dataset as a dict with `counts`, `R`, `Theta`, `lambda` and `labels`.
#[pyfunction]
#[pyo3(signature = (n_samples, tau=0.0, k_new=2, seed=0, regime="sbs"))]
fn simulate<'py>(
    py: Python<'py>,
    n_samples: usize,
    tau: f64,
    k_new: usize,
    seed: u64,
    regime: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let regime = match regime {
        "sbs" => Regime::Sbs,
        "indel" => Regime::Indel,
        other => return Err(PyValueError::new_err(format!("unknown regime {other}"))),
    };
    let spec = SimulationSpec::regime(regime, tau, n_samples, k_new);
    let d = simulate_dataset(&spec, &mut Rng::seed_from_u64(seed)).map_err(to_py)?;
    let out = PyDict::new(py);
    let counts: Vec<Vec<u32>> = d.counts.counts().outer_iter().map(|r| r.to_vec()).collect();
    out.set_item("counts", counts)?;
    out.set_item("R", rows(&d.r))?;
    out.set_item("Theta", rows(&d.theta))?;
    out.set_item("lambda", rows(&d.lambda))?;
    out.set_item("labels", d.factor_labels)?;
    out.set_item("channels", d.counts.channels().to_vec())?;
    Ok(out)
}

/// Fits the compressive model; returns `K_star`, `active`, `mu_mean`, `R_mean`, `Theta_mean`
/// and the per-chain mean log posteriors.
#[pyfunction]
#[pyo3(signature = (counts, k=20, epsilon=0.001, a=1.0, alpha=0.5, iters=5000, burnin=4000, chains=1, seed=0, threshold_c=5.0, a0=None, b0=None))]
#[allow(clippy::too_many_arguments)]
fn fit<'py>(
    py: Python<'py>,
    counts: Vec<Vec<u32>>,
    k: usize,
    epsilon: f64,
    a: f64,
    alpha: f64,
    iters: usize,
    burnin: usize,
    chains: usize,
    seed: u64,
    threshold_c: f64,
    a0: Option<f64>,
    b0: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let nc = counts.first().map_or(0, Vec::len);
    if counts.iter().any(|r| r.len() != nc) {
        return Err(PyValueError::new_err("ragged count matrix"));
    }
    let x = Array2::from_shape_fn((counts.len(), nc), |(i, j)| counts[i][j]);
    let data = CountMatrix::from_array(x).map_err(to_py)?;
    let cfg = ModelConfig {
        k,
        epsilon,
        a,
        alpha,
        informative: None,
        hyperprior: hyperprior(a0, b0)?,
    };
    cfg.validate().map_err(to_py)?;
    let sc = SamplerConfig {
        n_iter: iters,
        burn_in: burnin,
        n_chains: chains,
        seed,
        ..Default::default()
    };
    let samples = py.allow_threads(|| run_inference(&data, &cfg, &sc)).map_err(to_py)?;
    let s = summarize(&samples, epsilon, threshold_c, None).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("K_star", s.k_star)?;
    out.set_item("active", s.active.clone())?;
    out.set_item("mu_mean", s.mu_mean.clone())?;
    out.set_item("R_mean", s.r_mean.clone())?;
    out.set_item("Theta_mean", s.theta_mean.clone())?;
    let lp: Vec<Option<f64>> = samples.chains.iter().map(|c| c.mean_log_posterior).collect();
    out.set_item("chain_mean_log_posterior", lp)?;
    out.set_item("selected_chain", samples.chain_index)?;
    Ok(out)
}

/// Precision, sensitivity and F1 of estimated signatures against a truth at a cosine cutoff.
#[pyfunction]
#[pyo3(signature = (estimated, truth, cutoff=0.9))]
fn precision_sensitivity(estimated: Vec<Vec<f64>>, truth: Vec<Vec<f64>>, cutoff: f64) -> PyResult<(f64, f64, f64)> {
    let (e, t) = (matrix(estimated)?, matrix(truth)?);
    let d = selection::precision_sensitivity(e.view(), t.view(), cutoff).map_err(to_py)?;
    Ok((d.precision, d.sensitivity, d.f1))
}

#[pymodule]
fn compnmf(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(log_kummer_u, m)?)?;
    m.add_function(wrap_pyfunction!(log_gauss_2f1, m)?)?;
    m.add_function(wrap_pyfunction!(inv_kummer_moment, m)?)?;
    m.add_function(wrap_pyfunction!(concentration_point, m)?)?;
    m.add_function(wrap_pyfunction!(expected_loading_py, m)?)?;
    m.add_function(wrap_pyfunction!(relevance_posterior, m)?)?;
    m.add_function(wrap_pyfunction!(elbow_curve, m)?)?;
    m.add_function(wrap_pyfunction!(cosine_similarity, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(precision_sensitivity, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

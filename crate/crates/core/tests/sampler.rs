use compnmf_core::model::*;
use compnmf_core::rng::derive_seed;
use compnmf_core::sampler::*;
use compnmf_core::selection::{cosine_similarity, hungarian_match};
use compnmf_core::simulate::{simulate_dataset, SimulationSpec};
use compnmf_core::Rng;
use ndarray::{array, Array1, Array2};

fn state(data: &CountMatrix, r: Array2<f64>, theta: Array2<f64>, mu: Array1<f64>) -> ChainState {
    let k = r.ncols();
    let x = data.counts().clone();
    ChainState {
        r: SignatureMatrix::new(r).unwrap(),
        theta: LoadingMatrix::new(theta).unwrap(),
        mu: RelevanceVector::new(mu).unwrap(),
        // everything on the first factor; resampled or irrelevant in each test
        y: LatentCountTensor::from_fn(data, k, |i, j, kk| if kk == 0 { x[[i, j]] } else { 0 }).unwrap(),
        k_pre: 0,
        iteration: 0,
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

#[test]
fn latent_allocation_proportion() {
    let n = 100_000u32;
    let data = CountMatrix::from_array(array![[n]]).unwrap();
    let mut st = state(&data, array![[1.0, 1.0]], array![[3.0], [1.0]], array![1.0, 1.0]);
    let cfg = ModelConfig {
        k: 2,
        ..Default::default()
    };
    gibbs_step_latent(&mut st, &data, &cfg, &mut Rng::seed_from_u64(1)).unwrap();
    let frac = st.y.get(0, 0, 0) as f64 / n as f64;
    let se = (0.75 * 0.25 / n as f64).sqrt();
    assert!((frac - 0.75).abs() < 3.0 * se, "{frac}");
    assert_eq!(st.y.get(0, 0, 0) + st.y.get(0, 0, 1), n);
}

#[test]
fn latent_zero_cells_and_single_factor() {
    let data = CountMatrix::from_array(array![[0, 5], [7, 0]]).unwrap();
    let cfg = ModelConfig {
        k: 3,
        ..Default::default()
    };
    let mut st = state(&data, Array2::from_elem((2, 3), 0.5), Array2::ones((3, 2)), Array1::ones(3));
    gibbs_step_latent(&mut st, &data, &cfg, &mut Rng::seed_from_u64(2)).unwrap();
    assert!(st.y.cell(0, 0).iter().all(|&v| v == 0));
    assert!(st.y.cell(1, 1).iter().all(|&v| v == 0));
    st.y.check_sums(&data).unwrap();

    let cfg1 = ModelConfig {
        k: 1,
        ..Default::default()
    };
    let mut st1 = state(&data, Array2::from_elem((2, 1), 0.5), Array2::ones((1, 2)), Array1::ones(1));
    gibbs_step_latent(&mut st1, &data, &cfg1, &mut Rng::seed_from_u64(3)).unwrap();
    assert_eq!(st1.y.get(0, 1, 0), 5);
    assert_eq!(st1.y.get(1, 0, 0), 7);
}

#[test]
fn latent_zero_intensity_with_counts_is_an_error() {
    let data = CountMatrix::from_array(array![[0], [4]]).unwrap();
    let cfg = ModelConfig {
        k: 1,
        ..Default::default()
    };
    let mut st = state(&data, array![[1.0], [0.0]], array![[1.0]], array![1.0]);
    assert!(gibbs_step_latent(&mut st, &data, &cfg, &mut Rng::seed_from_u64(4)).is_err());
}

#[test]
fn signatures_prior_when_unallocated() {
    let ni = 4;
    let data = CountMatrix::from_array(Array2::zeros((ni, 1))).unwrap();
    let cfg = ModelConfig {
        k: 1,
        ..Default::default()
    };
    let mut st = state(&data, Array2::from_elem((ni, 1), 0.25), Array2::ones((1, 1)), Array1::ones(1));
    let mut rng = Rng::seed_from_u64(5);
    let n = 10_000;
    let mut first = Vec::with_capacity(n);
    for _ in 0..n {
        gibbs_step_signatures(&mut st, &data, &cfg, &mut rng);
        let col = st.r.column(0);
        assert!((col.sum() - 1.0).abs() < 1e-12);
        first.push(col[0]);
    }
    // Beta(α, 3α) marginal
    let se = (0.25 * 0.75 / (ni as f64 * cfg.alpha + 1.0) / n as f64).sqrt();
    assert!((mean(&first) - 0.25).abs() < 3.0 * se);
}

#[test]
fn signatures_concentrated_allocation() {
    let ni = 6;
    let mut x = Array2::zeros((ni, 1));
    x[[0, 0]] = 10_000;
    let data = CountMatrix::from_array(x).unwrap();
    let cfg = ModelConfig {
        k: 1,
        ..Default::default()
    };
    let mut st = state(&data, Array2::from_elem((ni, 1), 1.0 / ni as f64), Array2::ones((1, 1)), Array1::ones(1));
    let mut rng = Rng::seed_from_u64(6);
    let draws: Vec<f64> = (0..10_000)
        .map(|_| {
            gibbs_step_signatures(&mut st, &data, &cfg, &mut rng);
            st.r.column(0)[0]
        })
        .collect();
    let expect = (0.5 + 1e4) / (ni as f64 * 0.5 + 1e4);
    assert!((mean(&draws) - expect).abs() < 3.0 * sd(&draws) / 100.0);
}

fn loading_draws(y: u32, mu: f64, nj: usize, reps: usize, seed: u64) -> Vec<f64> {
    let data = CountMatrix::from_array(Array2::from_elem((1, nj), y)).unwrap();
    let cfg = ModelConfig {
        k: 1,
        ..Default::default()
    };
    let mut st = state(&data, array![[1.0]], Array2::ones((1, nj)), array![mu]);
    let mut rng = Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(nj * reps);
    for _ in 0..reps {
        gibbs_step_loadings(&mut st, &data, &cfg, &mut rng);
        out.extend(st.theta.as_array().iter().cloned());
    }
    out
}

#[test]
fn loadings_gamma_means() {
    let d0 = loading_draws(0, 0.001, 1000, 100, 7);
    assert!(d0.iter().all(|&t| t > 0.0));
    let m0 = 0.001 / 1.001;
    assert!((mean(&d0) - m0).abs() < 3.0 * sd(&d0) / (d0.len() as f64).sqrt());

    let d50 = loading_draws(50, 10.0, 1000, 100, 8);
    assert!((mean(&d50) - 51.0 / 1.1).abs() < 3.0 * sd(&d50) / (d50.len() as f64).sqrt());
}

fn relevance_draws(cfg: &ModelConfig, theta_row: &[f64], reps: usize, seed: u64) -> Vec<f64> {
    let nk = cfg.k;
    let nj = theta_row.len();
    let data = CountMatrix::from_array(Array2::zeros((2, nj))).unwrap();
    let theta = Array2::from_shape_fn((nk, nj), |(_, j)| theta_row[j]);
    let mut st = state(&data, Array2::from_elem((2, nk), 0.5), theta, Array1::ones(nk));
    let mut rng = Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(nk * reps);
    for _ in 0..reps {
        gibbs_step_relevance(&mut st, &data, cfg, &mut rng);
        out.extend(st.mu.as_array().iter().cloned());
    }
    out
}

#[test]
fn relevance_conditional_mean() {
    let cfg = ModelConfig {
        k: 100,
        ..Default::default()
    };
    let d = relevance_draws(&cfg, &[1.0, 2.0], 1000, 9);
    // InvGamma(5, 3.002)
    let (shape, scale): (f64, f64) = (5.0, 3.002);
    let m = scale / (shape - 1.0);
    assert!((m - 0.7505).abs() < 1e-12);
    let sd_true = m / (shape - 2.0).sqrt();
    assert!((mean(&d) - m).abs() < 3.0 * sd_true / (d.len() as f64).sqrt());

    let tiny = relevance_draws(&cfg, &[5e-10, 5e-10], 200, 10);
    assert!((mean(&tiny) / 0.0005 - 1.0).abs() < 0.05);
}

#[test]
fn relevance_fixed_strength() {
    let cfg = ModelConfig {
        k: 100,
        hyperprior: HyperpriorMode::FixedStrength { a0: 11.0, b0: 0.01 },
        ..Default::default()
    };
    let d = relevance_draws(&cfg, &[1.0, 2.0, 0.5], 1000, 11);
    let (shape, scale): (f64, f64) = (11.0 + 3.0, 0.01 + 3.5);
    let m = scale / (shape - 1.0);
    let sd_true = m / (shape - 2.0).sqrt();
    assert!((mean(&d) - m).abs() < 3.0 * sd_true / (d.len() as f64).sqrt());
}

/// Exact conditional of Y given R and Θ on a tiny instance, compared with repeated latent steps.
#[test]
fn latent_step_matches_enumerated_conditional() {
    let data = CountMatrix::from_array(array![[2, 1], [0, 1]]).unwrap();
    let r = array![[0.7, 0.2], [0.3, 0.8]];
    let theta = array![[1.0, 2.0], [3.0, 0.5]];
    let cfg = ModelConfig {
        k: 2,
        ..Default::default()
    };
    // probability of factor 0 in each cell
    let p0 = |i: usize, j: usize| {
        let a = r[[i, 0]] * theta[[0, j]];
        let b = r[[i, 1]] * theta[[1, j]];
        a / (a + b)
    };
    let binom = |n: u32, k: u32, p: f64| {
        let c = if n == 2 && k == 1 { 2.0 } else { 1.0 };
        c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
    };
    // configurations indexed by the factor-0 counts of cells (0,0), (0,1), (1,1)
    let mut probs = Vec::new();
    for a in 0..=2u32 {
        for b in 0..=1u32 {
            for c in 0..=1u32 {
                probs.push(binom(2, a, p0(0, 0)) * binom(1, b, p0(0, 1)) * binom(1, c, p0(1, 1)));
            }
        }
    }
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let mut st = state(&data, r.clone(), theta.clone(), Array1::ones(2));
    let mut rng = Rng::seed_from_u64(12);
    let n = 20_000;
    let mut counts = vec![0usize; probs.len()];
    for _ in 0..n {
        gibbs_step_latent(&mut st, &data, &cfg, &mut rng).unwrap();
        let idx = (st.y.get(0, 0, 0) * 4 + st.y.get(0, 1, 0) * 2 + st.y.get(1, 1, 0)) as usize;
        counts[idx] += 1;
    }
    let chi2: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&o, &p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    // 11 degrees of freedom, 1% level
    assert!(chi2 < 24.725, "chi2 = {chi2}");
}

#[test]
fn all_zero_data_compresses_everything() {
    let data = CountMatrix::from_array(Array2::zeros((6, 10))).unwrap();
    let cfg = ModelConfig {
        k: 3,
        ..Default::default()
    };
    let sc = SamplerConfig {
        n_iter: 2000,
        burn_in: 1000,
        ..Default::default()
    };
    let fit = run_chain(&data, &cfg, &sc, 13).unwrap();
    let lim = 5.0 * cfg.epsilon;
    assert!(fit.mean_mu().iter().all(|&m| m < lim));
    assert!(fit.mean_theta().iter().all(|&t| t < lim));
}

#[test]
fn single_factor_recovers_signature() {
    let (ni, nj) = (10, 20);
    let r0: Vec<f64> = (1..=ni).map(|i| i as f64 / 55.0).collect();
    let mut rng = Rng::seed_from_u64(14);
    let x = Array2::from_shape_fn((ni, nj), |(i, _)| compnmf_core::simulate::draw_count(r0[i] * 5000.0, 0.0, &mut rng) as u32);
    let data = CountMatrix::from_array(x).unwrap();
    assert!(data.total() > 90_000);
    let cfg = ModelConfig {
        k: 1,
        ..Default::default()
    };
    let sc = SamplerConfig {
        n_iter: 300,
        burn_in: 100,
        ..Default::default()
    };
    let fit = run_chain(&data, &cfg, &sc, 15).unwrap();
    let r = fit.mean_r();
    let tv: f64 = 0.5 * (0..ni).map(|i| (r[[i, 0]] - r0[i]).abs()).sum::<f64>();
    assert!(tv < 0.02, "tv = {tv}");
}

fn small_problem() -> (CountMatrix, ModelConfig, SamplerConfig) {
    let d = simulate_dataset(&SimulationSpec::de_novo(0.0, 24, 15, 2), &mut Rng::seed_from_u64(16)).unwrap();
    let cfg = ModelConfig {
        k: 4,
        ..Default::default()
    };
    let sc = SamplerConfig {
        n_iter: 200,
        burn_in: 100,
        ..Default::default()
    };
    (d.counts, cfg, sc)
}

#[test]
fn same_seed_same_samples() {
    let (data, cfg, sc) = small_problem();
    let a = run_chain(&data, &cfg, &sc, 17).unwrap();
    let b = run_chain(&data, &cfg, &sc, 17).unwrap();
    assert_eq!(a.r, b.r);
    assert_eq!(a.theta, b.theta);
    assert_eq!(a.mu, b.mu);
    assert_eq!(a.log_posterior, b.log_posterior);
    let c = run_chain(&data, &cfg, &sc, 18).unwrap();
    assert_ne!(a.log_posterior, c.log_posterior);
}

#[test]
fn single_chain_inference_is_run_chain() {
    let (data, cfg, sc) = small_problem();
    let sc = SamplerConfig { seed: 19, ..sc };
    let inf = run_inference(&data, &cfg, &sc).unwrap();
    let one = run_chain(&data, &cfg, &sc, sc.chain_seed(0)).unwrap();
    assert_eq!(inf.r, one.r);
    assert_eq!(inf.log_posterior, one.log_posterior);
    assert_eq!(inf.chains.len(), 1);
    assert_eq!(sc.chain_seed(0), derive_seed(19, 0));
}

#[test]
fn retained_draw_count_and_simplex() {
    let (data, cfg, sc) = small_problem();
    let sc = SamplerConfig { thin: 3, ..sc };
    let fit = run_chain(&data, &cfg, &sc, 20).unwrap();
    assert_eq!(fit.n_draws(), 100 / 3);
    assert_eq!(fit.log_posterior.len(), 200);
    for r in &fit.r {
        for col in r.columns() {
            assert!((col.sum() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn failed_chain_is_skipped() {
    let (data, cfg, sc) = small_problem();
    let sc = SamplerConfig {
        n_chains: 3,
        seed: 21,
        ..sc
    };
    let ni = data.n_channels();
    // chain 0 starts with every signature on channel 0, so cells on other channels have zero intensity
    let hook = |c: usize, st: &mut ChainState| {
        if c == 0 {
            st.r = SignatureMatrix::new(Array2::from_shape_fn((ni, cfg.k), |(i, _)| if i == 0 { 1.0 } else { 0.0 })).unwrap();
        }
    };
    let fit = run_inference_with_hook(&data, &cfg, &sc, &hook).unwrap();
    assert_ne!(fit.chain_index, 0);
    assert!(fit.chains[0].error.is_some());
    assert!(fit.chains[0].mean_log_posterior.is_none());
    let best = fit.chains[1..]
        .iter()
        .map(|c| c.mean_log_posterior.unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(fit.chains[fit.chain_index].mean_log_posterior, Some(best));

    let all_bad = |_: usize, st: &mut ChainState| hook(0, st);
    assert!(run_inference_with_hook(&data, &cfg, &sc, &all_bad).is_err());
}

#[test]
fn multi_chain_recovers_two_signatures() {
    let d = simulate_dataset(&SimulationSpec::de_novo(0.0, 96, 50, 2), &mut Rng::seed_from_u64(22)).unwrap();
    let cfg = ModelConfig {
        k: 8,
        ..Default::default()
    };
    let sc = SamplerConfig {
        n_iter: 1500,
        burn_in: 1000,
        n_chains: 4,
        seed: 23,
        ..Default::default()
    };
    let fit = run_inference(&d.counts, &cfg, &sc).unwrap();
    let r = fit.mean_r();
    let m = hungarian_match(r.view(), d.r.view()).unwrap();
    assert!(m.reference_similarity.iter().all(|&c| c >= 0.95), "{:?}", m.reference_similarity);
}

#[test]
fn surplus_factors_rarely_switch_on() {
    let d = simulate_dataset(&SimulationSpec::de_novo(0.0, 96, 100, 3), &mut Rng::seed_from_u64(24)).unwrap();
    let cfg = ModelConfig {
        k: 6,
        ..Default::default()
    };
    let sc = SamplerConfig {
        n_iter: 1500,
        burn_in: 1000,
        ..Default::default()
    };
    let fit = run_chain(&d.counts, &cfg, &sc, 25).unwrap();
    let m = hungarian_match(fit.mean_r().view(), d.r.view()).unwrap();
    let truth_slots: Vec<usize> = m.reference_to_estimated.iter().map(|e| e.unwrap()).collect();
    for k in (0..cfg.k).filter(|k| !truth_slots.contains(k)) {
        let on = fit.mu_trace(k).iter().filter(|&&v| v > 5.0 * cfg.epsilon).count();
        assert!((on as f64) < 0.05 * fit.n_draws() as f64, "factor {k} on in {on} draws");
    }
}

/// Relabelling the starting state relabels the posterior: checked on posterior means, since
/// the random streams are consumed in factor order.
#[test]
fn permuted_start_gives_permuted_posterior() {
    let d = simulate_dataset(&SimulationSpec::de_novo(0.0, 30, 40, 2), &mut Rng::seed_from_u64(26)).unwrap();
    let cfg = ModelConfig {
        k: 3,
        ..Default::default()
    };
    let warm = SamplerConfig {
        n_iter: 500,
        burn_in: 400,
        ..Default::default()
    };
    let start = run_chain(&d.counts, &cfg, &warm, 27).unwrap().final_state;
    let perm = [2usize, 0, 1];
    let mut permuted = start.clone();
    permuted.r = SignatureMatrix::new(start.r.as_array().select(ndarray::Axis(1), &perm)).unwrap();
    permuted.theta = LoadingMatrix::new(start.theta.as_array().select(ndarray::Axis(0), &perm)).unwrap();
    permuted.mu = RelevanceVector::new(Array1::from_iter(perm.iter().map(|&p| start.mu.as_array()[p]))).unwrap();
    permuted.y.permute_factors(&perm);
    let sc = SamplerConfig {
        n_iter: 1500,
        burn_in: 500,
        ..Default::default()
    };
    let a = run_chain_from(&d.counts, &cfg, &sc, start, &mut Rng::seed_from_u64(28)).unwrap();
    let b = run_chain_from(&d.counts, &cfg, &sc, permuted, &mut Rng::seed_from_u64(29)).unwrap();
    let (ra, rb) = (a.mean_r(), b.mean_r());
    let (ma, mb) = (a.mean_mu(), b.mean_mu());
    for (new, &old) in perm.iter().enumerate() {
        let active = ma[old] > 5.0 * cfg.epsilon;
        assert_eq!(active, mb[new] > 5.0 * cfg.epsilon);
        if active {
            let c = cosine_similarity(ra.column(old), rb.column(new)).unwrap();
            assert!(c > 0.99, "factor {old} -> {new}: cosine {c}");
            assert!((ma[old] / mb[new] - 1.0).abs() < 0.1);
        }
    }
}

#[test]
fn informative_chain_keeps_catalog_block_on_simplex() {
    let cat = compnmf_core::io::sbs_fixture().subset(&["synSBS1", "synSBS2", "synSBS13"]).unwrap();
    let spec = SimulationSpec {
        pre_signatures: Some(cat.signatures.clone()),
        pre_labels: cat.labels.clone(),
        ..SimulationSpec::sbs(0.0, 20, 1)
    };
    let d = simulate_dataset(&spec, &mut Rng::seed_from_u64(30)).unwrap();
    let cfg = ModelConfig {
        informative: Some(InformativePriorConfig {
            s: cat.signatures.clone(),
            beta: vec![200.0, 20.0, 80.0],
            b: 1.0,
            k_new: 3,
            labels: cat.labels.clone(),
        }),
        ..Default::default()
    };
    let sc = SamplerConfig {
        n_iter: 600,
        burn_in: 300,
        ..Default::default()
    };
    let fit = run_chain(&d.counts, &cfg, &sc, 31).unwrap();
    assert_eq!(fit.k_pre, 3);
    assert_eq!(fit.n_factors(), 6);
    for rho in fit.rho() {
        assert_eq!(rho.ncols(), 3);
        for col in rho.columns() {
            assert!((col.sum() - 1.0).abs() < 1e-9);
        }
    }
    assert_eq!(fit.omega()[0].nrows(), 3);
    assert_eq!(fit.tau()[0].len(), 3);
    // catalog slots stay close to their centres
    let r = fit.mean_r();
    for k in 0..3 {
        let c = cosine_similarity(r.column(k), cat.signatures.column(k)).unwrap();
        assert!(c > 0.9, "slot {k}: cosine {c}");
    }
}

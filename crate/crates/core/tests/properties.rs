use approx::assert_relative_eq;
use compnmf_core::distributions::{
    concentration_point, inv_kummer_log_moment, sample_dirichlet, sample_multinomial, InvKummerParams,
};
use compnmf_core::io::{read_counts, write_counts};
use compnmf_core::model::{
    ChainState, CountMatrix, LatentCountTensor, LoadingMatrix, ModelConfig, RelevanceVector, SignatureMatrix,
};
use compnmf_core::sampler::{gibbs_step_latent, gibbs_step_signatures};
use compnmf_core::selection::{
    cosine_matrix, effective_sample_size, hungarian_match, precision_sensitivity, rank_from_means,
};
use compnmf_core::Rng;
use ndarray::{Array1, Array2, Axis};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(0.01f64..1.0, rows * cols).prop_map(move |v| Array2::from_shape_vec((rows, cols), v).unwrap())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dirichlet_draws_lie_on_simplex(conc in prop::collection::vec(0.05f64..50.0, 2..40), seed in any::<u64>()) {
        let d = sample_dirichlet(&conc, &mut Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(d.iter().all(|&v| v >= 0.0));
        prop_assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn multinomial_preserves_total(n in 0u64..100_000, w in prop::collection::vec(0.0f64..1.0, 1..12), seed in any::<u64>()) {
        let total: f64 = w.iter().sum();
        prop_assume!(total > 1e-6);
        let p: Vec<f64> = w.iter().map(|v| v / total).collect();
        let y = sample_multinomial(n, &p, &mut Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(y.iter().sum::<u64>(), n);
        for (c, &pk) in y.iter().zip(&p) {
            if pk == 0.0 {
                prop_assert_eq!(*c, 0);
            }
        }
    }

    #[test]
    fn latent_and_signature_steps_keep_invariants(
        x in prop::collection::vec(0u32..50, 12),
        r in matrix(4, 3),
        theta in matrix(3, 3),
        seed in any::<u64>(),
    ) {
        let data = CountMatrix::from_array(Array2::from_shape_vec((4, 3), x).unwrap()).unwrap();
        let r = &r / &r.sum_axis(Axis(0));
        let cfg = ModelConfig { k: 3, ..Default::default() };
        let counts = data.counts().clone();
        let mut st = ChainState {
            r: SignatureMatrix::new(r).unwrap(),
            theta: LoadingMatrix::new(theta).unwrap(),
            mu: RelevanceVector::new(Array1::ones(3)).unwrap(),
            y: LatentCountTensor::from_fn(&data, 3, |i, j, k| if k == 0 { counts[[i, j]] } else { 0 }).unwrap(),
            k_pre: 0,
            iteration: 0,
        };
        let mut rng = Rng::seed_from_u64(seed);
        gibbs_step_latent(&mut st, &data, &cfg, &mut rng).unwrap();
        prop_assert!(st.y.check_sums(&data).is_ok());
        gibbs_step_signatures(&mut st, &data, &cfg, &mut rng);
        for col in st.r.as_array().columns() {
            prop_assert!((col.sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hungarian_matches_brute_force(est in matrix(5, 4), truth in matrix(5, 4)) {
        let m = hungarian_match(est.view(), truth.view()).unwrap();
        let sim = cosine_matrix(est.view(), truth.view());
        let best = permutations(4)
            .iter()
            .map(|p| p.iter().enumerate().map(|(e, &t)| sim[[e, t]]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((m.total_similarity - best).abs() < 1e-9);
    }

    #[test]
    fn precision_sensitivity_ignore_column_order(
        est in matrix(6, 4),
        truth in matrix(6, 3),
        cutoff in 0.5f64..0.99,
        pe in Just(permutations(4)).prop_shuffle(),
        pt in Just(permutations(3)).prop_shuffle(),
    ) {
        let a = precision_sensitivity(est.view(), truth.view(), cutoff).unwrap();
        let est_p = est.select(Axis(1), &pe[0]);
        let truth_p = truth.select(Axis(1), &pt[0]);
        let b = precision_sensitivity(est_p.view(), truth_p.view(), cutoff).unwrap();
        prop_assert_eq!(a.precision, b.precision);
        prop_assert_eq!(a.sensitivity, b.sensitivity);
    }

    #[test]
    fn rank_ignores_factor_order(mu in prop::collection::vec(1e-5f64..1.0, 1..25), c in 1.5f64..20.0, rot in 0usize..25) {
        let eps = 0.001;
        let a = rank_from_means(&mu, eps, c).unwrap();
        let n = mu.len();
        let shift = rot % n;
        let rotated: Vec<f64> = (0..n).map(|k| mu[(k + shift) % n]).collect();
        let b = rank_from_means(&rotated, eps, c).unwrap();
        prop_assert_eq!(a.k_star, b.k_star);
        let mut ma: Vec<f64> = a.active.iter().map(|&k| mu[k]).collect();
        let mut mb: Vec<f64> = b.active.iter().map(|&k| rotated[k]).collect();
        ma.sort_by(f64::total_cmp);
        mb.sort_by(f64::total_cmp);
        prop_assert_eq!(ma, mb);
        prop_assert_eq!(a.k_star, mu.iter().filter(|&&m| m > c * eps).count());
    }

    #[test]
    fn counts_csv_round_trip(x in prop::collection::vec(0u32..=u32::MAX, 1..40), cols in 1usize..5) {
        let rows = x.len().div_ceil(cols);
        let mut v = x.clone();
        v.resize(rows * cols, 0);
        let data = CountMatrix::from_array(Array2::from_shape_vec((rows, cols), v).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_counts(&mut buf, &data).unwrap();
        let back = read_counts(buf.as_slice()).unwrap();
        prop_assert_eq!(back, data);
    }

    #[test]
    fn inverse_kummer_moments_obey_jensen(
        lambda in 2.5f64..300.0,
        beta in 0.01f64..20.0,
        gamma in -5.0f64..300.0,
        delta in 0.1f64..5.0,
    ) {
        let p = InvKummerParams::new(lambda, beta, gamma, delta).unwrap();
        let m1 = inv_kummer_log_moment(1.0, &p).unwrap();
        let m2 = inv_kummer_log_moment(2.0, &p).unwrap();
        let minus = inv_kummer_log_moment(-1.0, &p).unwrap();
        // E[μ]² ≤ E[μ²] and E[μ] E[1/μ] ≥ 1
        prop_assert!(2.0 * m1 <= m2 + 1e-9);
        prop_assert!(m1 + minus >= -1e-9);
        prop_assert_eq!(inv_kummer_log_moment(0.0, &p).unwrap().abs() < 1e-12, true);
    }

    #[test]
    fn concentration_point_solves_its_quadratic(eps in 1e-5f64..0.1, y in 0.0f64..50.0, a in 0.1f64..5.0) {
        // 2μ² − (y − a + ε)μ − aε = 0
        let mu = concentration_point(eps, y, a).unwrap();
        prop_assert!(mu > 0.0);
        let resid = 2.0 * mu * mu - (y - a + eps) * mu - a * eps;
        let scale = 2.0 * mu * mu + (y - a + eps).abs() * mu + a * eps;
        prop_assert!(resid.abs() <= 1e-12 * scale);
    }

    #[test]
    fn ess_is_bounded(trace in prop::collection::vec(-10.0f64..10.0, 10..400)) {
        let e = effective_sample_size(&trace);
        let n = trace.len() as f64;
        prop_assert!(e.ess > 0.0);
        prop_assert!(e.ess <= n * n.log10() + 1e-9);
    }
}

#[test]
fn cosine_matrix_of_self_has_unit_diagonal() {
    let m = Array2::from_shape_fn((7, 3), |(i, j)| 1.0 + (i * 3 + j) as f64);
    let c = cosine_matrix(m.view(), m.view());
    for k in 0..3 {
        assert_relative_eq!(c[[k, k]], 1.0, epsilon = 1e-14);
    }
}

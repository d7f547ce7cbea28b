//! Simulates SBS-like counts and fits the compressive model.
//!
//! `cargo run --release -p compnmf-core --example fit_simulated -- [J] [K_new] [tau] [seed]`

use compnmf_core::model::ModelConfig;
use compnmf_core::sampler::{run_inference, SamplerConfig};
use compnmf_core::selection::{precision_sensitivity, summarize};
use compnmf_core::simulate::{simulate_dataset, SimulationSpec};
use compnmf_core::Rng;
use std::time::Instant;

fn main() -> compnmf_core::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let get = |i: usize, d: &str| args.get(i).cloned().unwrap_or_else(|| d.to_string());
    let j: usize = get(0, "50").parse().expect("J");
    let k_new: usize = get(1, "2").parse().expect("K_new");
    let tau: f64 = get(2, "0").parse().expect("tau");
    let seed: u64 = get(3, "1").parse().expect("seed");

    let data = simulate_dataset(&SimulationSpec::sbs(tau, j, k_new), &mut Rng::seed_from_u64(seed))?;
    let cfg = ModelConfig::default();
    let sc = SamplerConfig { seed, ..Default::default() };
    let t = Instant::now();
    let fit = run_inference(&data.counts, &cfg, &sc)?;
    let s = summarize(&fit, cfg.epsilon, 5.0, None)?;
    let det = precision_sensitivity(s.r_mean_array().view(), data.r.view(), 0.9)?;
    println!(
        "J={j} K0={} K*={} precision={:.3} sensitivity={:.3} ({:.1}s)",
        data.r.ncols(),
        s.k_star,
        det.precision,
        det.sensitivity,
        t.elapsed().as_secs_f64()
    );
    Ok(())
}

use crate::args::*;
use crate::error::CliError;
use crate::manifest::RunManifest;
use compnmf_core::cusp::{run_cusp, CuspConfig, CuspSamples};
use compnmf_core::io::{
    create, format_real, numbered, read_catalog_path, read_counts_path, read_matrix_path, read_trace, write_counts,
    write_matrix, write_table, write_trace, Catalog,
};
use compnmf_core::model::{CountMatrix, HyperpriorMode, InformativePriorConfig, ModelConfig};
use compnmf_core::rng::derive_seed;
use compnmf_core::sampler::{default_beta_grid, elicit_beta, run_inference, PosteriorSamples, SamplerConfig};
use compnmf_core::selection::{
    effective_sample_size, elbow_curve, linear_grid, mean_ess, precision_sensitivity, rmse_suite, summarize,
    FitSummary, LabelMatch, MetricsReport,
};
use compnmf_core::simulate::{simulate_dataset, SimulationSpec};
use compnmf_core::Rng;
use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::Path;

/// Salt separating the concentration-elicitation streams from the chain streams.
const ELICIT_SALT: u64 = 0x6265_7461_5f65_6c69;

pub const SUMMARY_FILE: &str = "summary.json";

type Outputs = Vec<String>;

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let s = serde_json::to_string_pretty(value).map_err(|e| CliError::Other(e.to_string()))?;
    std::fs::write(dir.join(name), s + "\n").map_err(|e| CliError::io(dir.join(name), e))
}

fn read_json(path: &Path) -> Result<serde_json::Value, CliError> {
    let s = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&s).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
}

fn labelled_matrix(dir: &Path, name: &str, corner: &str, rows: &[String], cols: &[String], m: &Array2<f64>) -> Result<(), CliError> {
    write_matrix(create(dir.join(name))?, corner, rows, cols, m.view())?;
    Ok(())
}

pub fn simulate(a: &SimulateArgs, m: &mut RunManifest) -> Result<Outputs, CliError> {
    let regime = match a.regime {
        RegimeArg::Sbs => compnmf_core::simulate::Regime::Sbs,
        RegimeArg::Indel => compnmf_core::simulate::Regime::Indel,
    };
    let mut spec = SimulationSpec::regime(regime, a.tau, a.j, a.k_new);
    if let Some(d) = a.dirichlet_new {
        spec.dirichlet_new = d;
    }
    if let Some(w) = a.w_shape {
        spec.loading_scale_shape = w;
    }
    let d = simulate_dataset(&spec, &mut Rng::seed_from_u64(a.seed))?;
    m.seed = Some(a.seed);
    m.config = json!({
        "regime": a.regime,
        "tau": spec.tau,
        "J": spec.n_samples,
        "I": spec.n_channels,
        "pre_signatures": spec.pre_labels,
        "K_new": spec.k_new,
        "dirichlet_new": spec.dirichlet_new,
        "loading_scale_shape": spec.loading_scale_shape,
        "loading_scale_rate": spec.loading_scale_rate,
        "loading_indiv_shape": spec.loading_indiv_shape,
        "loading_indiv_rate": spec.loading_indiv_rate,
    });
    let out = &a.out;
    write_counts(create(out.join("counts.csv"))?, &d.counts)?;
    let ch = d.counts.channels();
    let sm = d.counts.samples();
    labelled_matrix(out, "truth_R.csv", "channel", ch, &d.factor_labels, &d.r)?;
    labelled_matrix(out, "truth_Theta.csv", "signature", &d.factor_labels, sm, &d.theta)?;
    labelled_matrix(out, "truth_lambda.csv", "channel", ch, sm, &d.lambda)?;
    Ok(["counts.csv", "truth_R.csv", "truth_Theta.csv", "truth_lambda.csv"]
        .map(String::from)
        .to_vec())
}

/// Summary written by `fit --method cusp`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CuspSummary {
    /// Most frequent number of slab factors over retained draws.
    #[serde(rename = "K_star")]
    pub k_star: usize,
    /// Number of factors whose posterior spike probability is below 0.05.
    #[serde(rename = "K_star_spike_probability")]
    pub k_star_spike_probability: usize,
    pub active: Vec<usize>,
    pub spike_probability: Vec<f64>,
    pub mu_mean: Vec<f64>,
    pub matches: Option<Vec<LabelMatch>>,
}

fn resolve_catalog(path: &Path, data: &CountMatrix, m: &mut RunManifest) -> Result<Catalog, CliError> {
    m.add_input(path)?;
    Ok(read_catalog_path(path)?.align_channels(data.channels())?)
}

fn best_matches(r: &Array2<f64>, cat: &Catalog) -> Vec<LabelMatch> {
    let sim = compnmf_core::selection::cosine_matrix(r.view(), cat.signatures.as_array().view());
    sim.outer_iter()
        .map(|row| {
            let (q, c) = row
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (q, &v)| if v > acc.1 { (q, v) } else { acc });
            LabelMatch {
                label: cat.labels[q].clone(),
                cosine: c,
            }
        })
        .collect()
}

fn check_fit_flags(a: &FitArgs) -> Result<(), CliError> {
    let informative_only = [
        ("--k-new", a.k_new.is_some()),
        ("--b", a.b.is_some()),
        ("--beta-target", a.beta_target.is_some()),
    ];
    if a.cosmic_file.is_none() {
        if let Some((flag, _)) = informative_only.iter().find(|(_, set)| *set) {
            return Err(CliError::Usage(format!("{flag} requires --cosmic-file")));
        }
    }
    if a.method == Method::Cusp && a.cosmic_file.is_some() {
        return Err(CliError::Usage("--cosmic-file cannot be combined with --method cusp".into()));
    }
    if a.method == Method::Compressive && (a.a0.is_some() || a.b0.is_some()) {
        return Err(CliError::Usage("--a0/--b0 apply to fixed-strength and cusp only".into()));
    }
    if !(a.threshold_c > 1.0) {
        return Err(CliError::Usage("--threshold-c must exceed 1".into()));
    }
    Ok(())
}

pub fn fit(a: &FitArgs, m: &mut RunManifest) -> Result<Outputs, CliError> {
    check_fit_flags(a)?;
    m.add_input(&a.input)?;
    let data = read_counts_path(&a.input)?;
    let sc = SamplerConfig {
        n_iter: a.iters,
        burn_in: a.burnin,
        n_chains: a.chains,
        seed: a.seed,
        thin: a.thin,
        rematch: !a.no_rematch,
    };
    sc.validate()?;
    m.seed = Some(a.seed);
    m.derived_seeds = (0..a.chains).map(|c| (format!("chain{c}"), sc.chain_seed(c))).collect();
    let reference = match &a.reference {
        Some(p) => Some(resolve_catalog(p, &data, m)?),
        None => None,
    };
    if a.method == Method::Cusp {
        return fit_cusp(a, &data, &sc, reference.as_ref(), m);
    }
    let hyperprior = match a.method {
        Method::FixedStrength => HyperpriorMode::FixedStrength {
            a0: a.a0.unwrap_or(11.0),
            b0: a.b0.unwrap_or(0.01),
        },
        _ => HyperpriorMode::Compressive,
    };
    let mut cfg = ModelConfig {
        k: a.k,
        epsilon: a.epsilon,
        a: a.a,
        alpha: a.alpha,
        informative: None,
        hyperprior,
    };
    let mut catalog = None;
    if let Some(path) = &a.cosmic_file {
        let cat = resolve_catalog(path, &data, m)?;
        let target = a.beta_target.unwrap_or(0.975);
        let grid = default_beta_grid();
        let mut beta = Vec::with_capacity(cat.labels.len());
        for (k, label) in cat.labels.iter().enumerate() {
            let seed = derive_seed(a.seed ^ ELICIT_SALT, k as u64);
            m.derived_seeds.push((format!("elicit_{label}"), seed));
            let s = cat.signatures.column(k).to_vec();
            let e = elicit_beta(&s, target, a.beta_draws, &grid, &mut Rng::seed_from_u64(seed))?;
            beta.push(e.beta);
        }
        cfg.informative = Some(InformativePriorConfig {
            s: cat.signatures.clone(),
            beta,
            b: a.b.unwrap_or(a.a),
            k_new: a.k_new.unwrap_or(10),
            labels: cat.labels.clone(),
        });
        catalog = Some(cat);
    }
    cfg.validate()?;
    let mut resolved = serde_json::to_value(&cfg).map_err(|e| CliError::Other(e.to_string()))?;
    if let Some(inf) = resolved.get_mut("informative").and_then(|v| v.as_object_mut()) {
        // the catalog itself is an input file; keep only its concentrations in the echo
        inf.remove("s");
    }
    m.config = json!({ "model": resolved, "sampler": sc, "threshold_c": a.threshold_c });

    let fit = run_inference(&data, &cfg, &sc)?;
    m.chains = fit.chains.clone();
    m.selected_chain = Some(fit.chain_index);
    let label_source = catalog.as_ref().or(reference.as_ref());
    let summary = summarize(
        &fit,
        cfg.epsilon,
        a.threshold_c,
        label_source.map(|c| (&c.signatures, c.labels.as_slice())),
    )?;
    write_json(&a.out, SUMMARY_FILE, &summary)?;
    write_fit_outputs(&a.out, &data, &fit, &summary)
}

fn factor_names(summary: &FitSummary) -> Vec<String> {
    summary
        .active
        .iter()
        .zip(&summary.prior_labels)
        .map(|(k, l)| l.clone().unwrap_or_else(|| format!("sig{}", k + 1)))
        .collect()
}

fn write_fit_outputs(out: &Path, data: &CountMatrix, fit: &PosteriorSamples, summary: &FitSummary) -> Result<Outputs, CliError> {
    let names = factor_names(summary);
    let (ni, nj) = data.counts().dim();
    let r_mean = if summary.k_star == 0 { Array2::zeros((ni, 0)) } else { summary.r_mean_array() };
    let t_mean = if summary.k_star == 0 { Array2::zeros((0, nj)) } else { summary.theta_mean_array() };
    labelled_matrix(out, "R_mean.csv", "channel", data.channels(), &names, &r_mean)?;
    labelled_matrix(out, "Theta_mean.csv", "signature", &names, data.samples(), &t_mean)?;
    let nk = fit.n_factors();
    let mu_cols: Vec<Vec<f64>> = (0..nk).map(|k| fit.mu_trace(k)).collect();
    write_trace(create(out.join("mu_trace.csv"))?, &numbered("mu", nk), &mu_cols)?;
    write_trace(
        create(out.join("logpost_trace.csv"))?,
        &["log_posterior".to_string()],
        std::slice::from_ref(&fit.log_posterior),
    )?;
    let mut r_names = Vec::new();
    let mut r_cols = Vec::new();
    let mut t_names = Vec::new();
    let mut t_cols = Vec::new();
    for &k in &summary.active {
        for i in 0..ni {
            r_names.push(format!("r_{}_{}", k + 1, i + 1));
            r_cols.push(fit.r.iter().map(|r| r[[i, k]]).collect());
        }
        for j in 0..nj {
            t_names.push(format!("theta_{}_{}", k + 1, j + 1));
            t_cols.push(fit.theta.iter().map(|t| t[[k, j]]).collect());
        }
    }
    write_trace(create(out.join("R_trace.csv"))?, &r_names, &r_cols)?;
    write_trace(create(out.join("Theta_trace.csv"))?, &t_names, &t_cols)?;
    Ok([
        SUMMARY_FILE,
        "R_mean.csv",
        "Theta_mean.csv",
        "mu_trace.csv",
        "logpost_trace.csv",
        "R_trace.csv",
        "Theta_trace.csv",
    ]
    .map(String::from)
    .to_vec())
}

fn fit_cusp(
    a: &FitArgs,
    data: &CountMatrix,
    sc: &SamplerConfig,
    reference: Option<&Catalog>,
    m: &mut RunManifest,
) -> Result<Outputs, CliError> {
    let cfg = CuspConfig {
        k: a.k,
        a: a.a,
        alpha: a.alpha,
        alpha_pi: a.alpha_pi,
        mu_inf: a.mu_inf,
        a0: a.a0.unwrap_or(1.0),
        b0: a.b0.unwrap_or(1.0),
    };
    cfg.validate()?;
    m.config = json!({ "cusp": cfg, "sampler": sc });
    let s: CuspSamples = run_cusp(data, &cfg, sc)?;
    m.chains = s.chains.clone();
    m.selected_chain = Some(s.chain_index);
    let active = s.active_by_spike_probability(0.05);
    let r_mean = s.mean_r().select(Axis(1), &active);
    let t_mean = s.mean_theta().select(Axis(0), &active);
    let mut mu_mean = vec![0.0; cfg.k];
    for mu in &s.mu {
        for (acc, v) in mu_mean.iter_mut().zip(mu) {
            *acc += v / s.n_draws() as f64;
        }
    }
    let summary = CuspSummary {
        k_star: s.k_star_majority(),
        k_star_spike_probability: active.len(),
        active: active.clone(),
        spike_probability: s.spike_probability(),
        mu_mean,
        matches: reference.map(|c| best_matches(&r_mean, c)),
    };
    write_json(&a.out, SUMMARY_FILE, &summary)?;
    let names: Vec<String> = active.iter().map(|k| format!("sig{}", k + 1)).collect();
    labelled_matrix(&a.out, "R_mean.csv", "channel", data.channels(), &names, &r_mean)?;
    labelled_matrix(&a.out, "Theta_mean.csv", "signature", &names, data.samples(), &t_mean)?;
    let mu_cols: Vec<Vec<f64>> = (0..cfg.k).map(|k| s.mu.iter().map(|v| v[k]).collect()).collect();
    write_trace(create(a.out.join("mu_trace.csv"))?, &numbered("mu", cfg.k), &mu_cols)?;
    write_trace(
        create(a.out.join("logpost_trace.csv"))?,
        &["log_likelihood".to_string()],
        std::slice::from_ref(&s.log_likelihood),
    )?;
    Ok([SUMMARY_FILE, "R_mean.csv", "Theta_mean.csv", "mu_trace.csv", "logpost_trace.csv"]
        .map(String::from)
        .to_vec())
}

pub fn compare(a: &CompareArgs, m: &mut RunManifest) -> Result<Outputs, CliError> {
    let inputs = [
        a.fit.join(SUMMARY_FILE),
        a.fit.join("R_mean.csv"),
        a.fit.join("Theta_mean.csv"),
        a.truth.join("counts.csv"),
        a.truth.join("truth_R.csv"),
        a.truth.join("truth_Theta.csv"),
        a.truth.join("truth_lambda.csv"),
    ];
    for p in &inputs {
        if !p.exists() {
            return Err(CliError::Io(format!("missing input file {}", p.display())));
        }
        m.add_input(p)?;
    }
    let summary = read_json(&inputs[0])?;
    let k_star = summary
        .get("K_star")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| CliError::Format(format!("{}: no K_star", inputs[0].display())))? as usize;
    let r_hat = read_matrix_path(&inputs[1])?.values;
    let t_hat = read_matrix_path(&inputs[2])?.values;
    let x = read_counts_path(&inputs[3])?;
    let r0 = read_matrix_path(&inputs[4])?.values;
    let t0 = read_matrix_path(&inputs[5])?.values;
    let l0 = read_matrix_path(&inputs[6])?.values;
    if !(a.cutoff > 0.0 && a.cutoff <= 1.0) {
        return Err(CliError::Usage("--cutoff must lie in (0, 1]".into()));
    }
    m.config = json!({ "cutoff": a.cutoff, "cutoff_grid": a.cutoff_grid });
    let det = precision_sensitivity(r_hat.view(), r0.view(), a.cutoff)?;
    let rmse = rmse_suite(x.to_f64().view(), r_hat.view(), t_hat.view(), r0.view(), t0.view(), l0.view())?;
    let report = MetricsReport {
        detection: det,
        rmse,
        k_star,
        k_true: r0.ncols(),
    };
    write_json(&a.out, "metrics.json", &report)?;
    let mut outs = vec!["metrics.json".to_string()];
    if let Some(grid) = &a.cutoff_grid {
        let rows = grid
            .iter()
            .map(|&c| {
                let d = precision_sensitivity(r_hat.view(), r0.view(), c)?;
                Ok(vec![format_real(c), format_real(d.precision), format_real(d.sensitivity), format_real(d.f1)])
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let header = ["cutoff", "precision", "sensitivity", "F1"].map(String::from);
        write_table(create(a.out.join("f1_curve.csv"))?, &header, rows.into_iter())?;
        outs.push("f1_curve.csv".into());
    }
    Ok(outs)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockEss {
    pub mean_ess: Option<f64>,
    pub parameters: usize,
    pub degenerate: usize,
}

fn trace_block(path: &Path, m: &mut RunManifest) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    m.add_input(path)?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    // a fit with no active factors leaves a trace with the iteration column only
    if text.lines().next().is_some_and(|h| h.trim() == "iteration") {
        return Ok((Vec::new(), Vec::new()));
    }
    Ok(read_trace(text.as_bytes())?)
}

pub fn diagnose(a: &DiagnoseArgs, m: &mut RunManifest) -> Result<Outputs, CliError> {
    let blocks: Vec<(String, std::path::PathBuf)> = match (&a.fit, &a.trace) {
        (Some(dir), _) => ["R", "Theta", "mu"]
            .iter()
            .map(|b| (b.to_string(), dir.join(format!("{b}_trace.csv"))))
            .collect(),
        (None, Some(p)) => vec![("trace".to_string(), p.clone())],
        (None, None) => return Err(CliError::Usage("one of --fit or --trace is required".into())),
    };
    let mut rows = Vec::new();
    let mut report = serde_json::Map::new();
    for (block, path) in blocks {
        let (names, cols) = trace_block(&path, m)?;
        for (n, c) in names.iter().zip(&cols) {
            let e = effective_sample_size(c);
            rows.push(vec![block.clone(), n.clone(), format_real(e.ess), e.degenerate.to_string()]);
        }
        let (mean, degenerate) = mean_ess(cols.iter().map(Vec::as_slice));
        let b = BlockEss {
            mean_ess: mean,
            parameters: cols.len(),
            degenerate,
        };
        report.insert(block, serde_json::to_value(b).expect("serialisable"));
    }
    write_json(&a.out, "diagnostics.json", &report)?;
    let header = ["block", "parameter", "ess", "degenerate"].map(String::from);
    write_table(create(a.out.join("ess.csv"))?, &header, rows.into_iter())?;
    Ok(vec!["diagnostics.json".into(), "ess.csv".into()])
}

pub fn elbow(a: &ElbowArgs, m: &mut RunManifest) -> Result<Outputs, CliError> {
    if a.points == 0 || a.j_list.is_empty() || !(a.ybar_max >= 0.0) {
        return Err(CliError::Usage("elbow needs --points >= 1, a nonempty --J-list and --ybar-max >= 0".into()));
    }
    let mode = match a.mode {
        ElbowMode::Compressive => HyperpriorMode::Compressive,
        ElbowMode::FixedStrength => HyperpriorMode::FixedStrength { a0: a.a0, b0: a.b0 },
    };
    m.config = json!({ "a": a.a, "epsilon": a.epsilon, "J": a.j_list, "ybar_max": a.ybar_max, "points": a.points, "hyperprior": mode });
    let grid = linear_grid(a.ybar_max, a.points);
    let mut rows = Vec::new();
    for &j in &a.j_list {
        for p in elbow_curve(a.a, a.epsilon, j, &grid, mode)? {
            rows.push(vec![
                p.j.to_string(),
                format_real(p.ybar),
                format_real(p.mean),
                format_real(p.q10),
                format_real(p.q90),
            ]);
        }
    }
    let header = ["J", "ybar", "mean", "q10", "q90"].map(String::from);
    write_table(create(a.out.join("elbow.csv"))?, &header, rows.into_iter())?;
    Ok(vec!["elbow.csv".into()])
}

//! `compnmf` command-line tool.

mod args;
mod commands;
mod error;
mod manifest;

use args::{Cli, Command, ReplayArgs};
use clap::Parser;
use error::CliError;
use manifest::{sha256_file, RunManifest};
use std::process::ExitCode;
use std::time::Instant;

/// Overrides the worker thread count.
const THREADS_ENV: &str = "COMPNMF_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Other(e.to_string()))
}

/// Runs one command and writes its manifest.
fn execute(cmd: &Command) -> Result<RunManifest, CliError> {
    let out = cmd.out_dir();
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let start = Instant::now();
    let mut m = RunManifest::new(cmd);
    let outputs = match cmd {
        Command::Simulate(a) => commands::simulate(a, &mut m)?,
        Command::Fit(a) => commands::fit(a, &mut m)?,
        Command::Compare(a) => commands::compare(a, &mut m)?,
        Command::Diagnose(a) => commands::diagnose(a, &mut m)?,
        Command::Elbow(a) => commands::elbow(a, &mut m)?,
        Command::Replay(_) => unreachable!("replay is dispatched separately"),
    };
    m.record_outputs(out, &outputs)?;
    m.duration_secs = start.elapsed().as_secs_f64();
    m.write(out)?;
    Ok(m)
}

fn replay(a: &ReplayArgs) -> Result<(), CliError> {
    let old = RunManifest::read(&a.manifest)?;
    if matches!(old.args, Command::Replay(_)) {
        return Err(CliError::Usage("cannot replay a replay".into()));
    }
    for input in &old.inputs {
        let now = sha256_file(&input.path)?;
        if now != input.sha256 {
            return Err(CliError::Format(format!("input {} changed since the recorded run", input.path.display())));
        }
    }
    let mut cmd = old.args.clone();
    cmd.set_out_dir(a.out.clone());
    let new = execute(&cmd)?;
    let mut differing = Vec::new();
    for (o, n) in old.outputs.iter().zip(&new.outputs) {
        let same = o.path == n.path && o.sha256 == n.sha256;
        println!("{} {}", if same { "identical" } else { "differs  " }, n.path.display());
        if !same {
            differing.push(n.path.display().to_string());
        }
    }
    if old.outputs.len() != new.outputs.len() {
        differing.push("output file list".into());
    }
    if differing.is_empty() {
        Ok(())
    } else {
        Err(CliError::Mismatch(differing.join(", ")))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Replay(a) => replay(a),
        cmd => {
            let m = execute(cmd)?;
            eprintln!("{} finished in {:.1}s, outputs in {}", m.command, m.duration_secs, cmd.out_dir().display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("compnmf: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde::Serialize;
use sqrtlasso_core::{generate, solve_path, GenSpec, LossKind, PathConfig};

use super::AlgoArg;
use crate::error::{CliError, CliResult};
use crate::io::{ensure_dir, fmt_real, write_table};
use crate::manifest::RunManifest;

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    /// Problem size multiplier: n = 200 * scale, d = 2000 * scale.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Trials per cell, on seeds seed, seed + 1, ...
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = AlgoArg::Gd)]
    pub algo: AlgoArg,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.5, 1.0, 2.0])]
    pub sigmas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1, 10, 30])]
    pub stages: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1e-4, 1e-5, 1e-6])]
    pub eps: Vec<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub const BENCH_HEADER: [&str; 6] = ["sigma", "N", "eps", "iterations", "seconds", "minimal_mse"];

pub fn run(args: &BenchArgs, seed: u64) -> CliResult<()> {
    if !(args.scale > 0.0 && args.scale.is_finite()) {
        return Err(CliError::Usage(format!("--scale must be positive, got {}", args.scale)));
    }
    if args.trials == 0 || args.stages.contains(&0) || args.eps.iter().any(|e| !(*e > 0.0)) {
        return Err(CliError::Usage("--trials, --stages and --eps must be positive".into()));
    }
    let n = ((200.0 * args.scale).round() as usize).max(4);
    let d = ((2000.0 * args.scale).round() as usize).max(4);

    let mut rows = Vec::new();
    let mut incomplete = 0usize;
    for &sigma in &args.sigmas {
        let problems = (0..args.trials as u64)
            .map(|t| generate(&GenSpec::new(n, d, sigma, seed + t))?.problem())
            .collect::<Result<Vec<_>, _>>()?;
        for &stages in &args.stages {
            for &eps in &args.eps {
                let cfg = PathConfig::new(args.algo.into(), eps).with_stages(stages);
                let (mut iters, mut secs, mut mse) = (0.0, 0.0, 0.0);
                for p in &problems {
                    let start = Instant::now();
                    let path = solve_path(p, LossKind::SqrtL2, &cfg)?;
                    secs += start.elapsed().as_secs_f64();
                    iters += path.total_inner_iterations as f64;
                    mse += path.minimal_mse;
                    if !path.all_converged() {
                        incomplete += 1;
                    }
                }
                let t = args.trials as f64;
                rows.push(vec![
                    fmt_real(sigma),
                    stages.to_string(),
                    fmt_real(eps),
                    (iters / t).to_string(),
                    fmt_real(secs / t),
                    fmt_real(mse / t),
                ]);
            }
        }
    }

    ensure_dir(&args.out)?;
    let mut manifest = RunManifest::new("bench", args, seed)?;
    write_table(&args.out.join("bench.csv"), &BENCH_HEADER, rows)?;
    manifest.add("bench.csv");
    manifest.write(&args.out)?;
    if incomplete > 0 {
        eprintln!("warning: {incomplete} path runs did not converge at every stage");
    }
    Ok(())
}

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use sqrtlasso_core::applications::precision::standardize;
use sqrtlasso_core::{
    default_cmr_lambda, default_lambda, estimate_precision, solve_cmr, DenseMatrix, MultiResponse, PathConfig,
    PrecisionEstimate,
};

use super::{check_positive, AlgoArg, SCHEMA_VERSION};
use crate::error::{CliError, CliResult};
use crate::io::{ensure_dir, fmt_real, read_columns, read_matrix, write_json, write_rows};
use crate::manifest::RunManifest;

#[derive(Debug, Args, Serialize)]
pub struct GraphArgs {
    /// Directory holding X.csv (samples in rows).
    #[arg(long)]
    pub data: PathBuf,
    /// Node-wise regularization parameter [default: sqrt(log d / n)].
    #[arg(long, allow_negative_numbers = true, conflicts_with = "target_sparsity")]
    pub lambda: Option<f64>,
    /// Search lambda so that this fraction of possible edges is present.
    #[arg(long)]
    pub target_sparsity: Option<f64>,
    #[arg(long, value_enum, default_value_t = AlgoArg::Newton)]
    pub algo: AlgoArg,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Worker threads for the node-wise regressions [default: all cores].
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct GraphReport {
    schema_version: u32,
    lambda: f64,
    target_sparsity: Option<f64>,
    search_steps: usize,
    sparsity: f64,
    n_edges: usize,
    failed_columns: Vec<usize>,
}

/// Relative tolerance accepted by the sparsity search.
const SPARSITY_TOL: f64 = 0.05;
const MAX_SEARCH_STEPS: usize = 40;

/// Bisection on `log lambda`. Sparsity is non-increasing in lambda up to
/// ties, and no edge survives above the largest absolute correlation.
fn search_lambda(x: &DenseMatrix, target: f64, cfg: &PathConfig) -> CliResult<(f64, PrecisionEstimate, usize)> {
    let (z, _) = standardize(x)?;
    let (n, d) = (z.rows(), z.cols());
    let mut hi: f64 = 0.0;
    for k in 0..d {
        let ck = z.column(k);
        for j in k + 1..d {
            let c: f64 = ck.iter().zip(z.column(j)).map(|(a, b)| a * b).sum::<f64>() / n as f64;
            hi = hi.max(c.abs());
        }
    }
    if !(hi > 0.0) {
        return Err(CliError::Usage("all columns are uncorrelated; no sparsity target is reachable".into()));
    }
    let mut lo = hi * 1e-3;
    let mut best: Option<(f64, PrecisionEstimate)> = None;
    for step in 1..=MAX_SEARCH_STEPS {
        let mid = (lo * hi).sqrt();
        let est = estimate_precision(x, mid, cfg)?;
        let s = est.sparsity();
        let miss = (s - target).abs();
        if best.as_ref().is_none_or(|(_, b)| miss < (b.sparsity() - target).abs()) {
            best = Some((mid, est));
        }
        if miss <= SPARSITY_TOL * target {
            let (l, e) = best.expect("set above");
            return Ok((l, e, step));
        }
        if s > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (l, e) = best.expect("at least one step");
    Ok((l, e, MAX_SEARCH_STEPS))
}

pub fn run_graph(args: &GraphArgs, seed: u64) -> CliResult<()> {
    check_positive("lambda", args.lambda)?;
    check_positive("eps", Some(args.eps))?;
    if let Some(t) = args.target_sparsity {
        if !(t > 0.0 && t < 1.0) {
            return Err(CliError::Usage(format!("--target-sparsity must lie in (0, 1), got {t}")));
        }
    }
    let x = read_matrix(&args.data.join("X.csv"))?;
    let cfg = PathConfig::new(args.algo.into(), args.eps);
    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))?;
    let (lambda, est, steps) = pool.install(|| -> CliResult<_> {
        match args.target_sparsity {
            Some(t) => search_lambda(&x, t, &cfg),
            None => {
                let lambda = args.lambda.unwrap_or_else(|| default_lambda(x.rows(), x.cols()));
                Ok((lambda, estimate_precision(&x, lambda, &cfg)?, 0))
            }
        }
    })?;

    ensure_dir(&args.out)?;
    let mut manifest = RunManifest::new("graph", args, seed)?;
    let d = est.d;
    write_rows(
        &args.out.join("omega.csv"),
        (0..d).map(|k| (0..d).map(|j| fmt_real(est.get(k, j))).collect::<Vec<_>>()),
    )?;
    let edges = est.edges();
    write_rows(
        &args.out.join("edges.csv"),
        edges.iter().map(|&(k, j)| [k.to_string(), j.to_string(), fmt_real(est.get(k, j))]),
    )?;
    let report = GraphReport {
        schema_version: SCHEMA_VERSION,
        lambda,
        target_sparsity: args.target_sparsity,
        search_steps: steps,
        sparsity: est.sparsity(),
        n_edges: edges.len(),
        failed_columns: est.failed_columns.clone(),
    };
    write_json(&args.out.join("result.json"), &report)?;
    manifest.artifacts.extend(["omega.csv", "edges.csv", "result.json"].map(String::from));
    manifest.write(&args.out)?;

    if est.failed_columns.len() * 10 > d {
        return Err(CliError::NotConverged(format!(
            "{} of {d} node-wise regressions failed",
            est.failed_columns.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Args, Serialize)]
pub struct CmrArgs {
    /// Directory holding X.csv and a y.csv with one column per task.
    #[arg(long)]
    pub data: PathBuf,
    /// Regularization parameter [default: (sqrt(m) + sqrt(2 log d)) / sqrt(n)].
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Number of path stages [default: smallest N with stage ratio at least 0.9].
    #[arg(long)]
    pub n_stages: Option<usize>,
    /// Iteration budget per stage.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct CmrReport {
    schema_version: u32,
    lambda: f64,
    eps: f64,
    tasks: usize,
    converged: bool,
    iterations: usize,
    objective: f64,
    omega: f64,
    rows: Vec<usize>,
}

pub fn run_cmr(args: &CmrArgs, seed: u64) -> CliResult<()> {
    check_positive("lambda", args.lambda)?;
    check_positive("eps", Some(args.eps))?;
    if args.n_stages == Some(0) {
        return Err(CliError::Usage("--n-stages must be at least 1".into()));
    }
    let x = read_matrix(&args.data.join("X.csv"))?;
    let y = MultiResponse::from_columns(read_columns(&args.data.join("y.csv"))?)?;
    let lambda = args
        .lambda
        .unwrap_or_else(|| default_cmr_lambda(x.rows(), x.cols(), y.m()));
    let mut cfg = PathConfig::new(AlgoArg::Gd.into(), args.eps);
    cfg.n_stages = args.n_stages;
    cfg.max_iter = args.max_iter;
    let res = solve_cmr(&x, &y, lambda, &cfg)?;

    ensure_dir(&args.out)?;
    let mut manifest = RunManifest::new("cmr", args, seed)?;
    let theta = &res.theta;
    write_rows(
        &args.out.join("theta_mat.csv"),
        (0..theta.d()).map(|j| theta.row(j).iter().map(|v| fmt_real(*v)).collect::<Vec<_>>()),
    )?;
    let rows = theta.row_support();
    write_rows(&args.out.join("rows.csv"), rows.iter().map(|j| [j.to_string()]))?;
    let report = CmrReport {
        schema_version: SCHEMA_VERSION,
        lambda,
        eps: args.eps,
        tasks: y.m(),
        converged: res.converged,
        iterations: res.total_iterations(),
        objective: res.objective,
        omega: res.omega,
        rows,
    };
    write_json(&args.out.join("result.json"), &report)?;
    manifest.artifacts.extend(["theta_mat.csv", "rows.csv", "result.json"].map(String::from));
    manifest.write(&args.out)?;
    if !res.converged {
        return Err(CliError::NotConverged("multitask solver did not converge at every stage".into()));
    }
    Ok(())
}

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use sqrtlasso_core::{
    default_lambda, solve_gd, solve_newton, solve_path, GdConfig, LossKind, NewtonConfig, PathConfig, PathOutcome,
    SolveResult, SolveStatus,
};

use super::{check_positive, load_problem, resolve, sparse, write_trace, AlgoArg, EpsRuleArg, LossArg, SparseEntry, SCHEMA_VERSION};
use crate::error::{CliError, CliResult};
use crate::io::{ensure_dir, write_json};
use crate::manifest::RunManifest;

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    /// Directory holding X.csv and y.csv.
    #[arg(long)]
    pub data: PathBuf,
    /// Solver; a cold newton start can stall when d > n, use `path` there.
    #[arg(long, value_enum, default_value_t = AlgoArg::Gd)]
    pub algo: AlgoArg,
    #[arg(long, value_enum, default_value_t = LossArg::Sqrt)]
    pub loss: LossArg,
    /// Regularization parameter [default: sqrt(log d / n)].
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Tolerance on the KKT residual.
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Iteration budget (outer iterations for newton).
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Per-iteration trace CSV; relative paths go inside the output directory.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct SolveReport {
    schema_version: u32,
    algo: AlgoArg,
    loss: LossArg,
    lambda: f64,
    eps: f64,
    status: &'static str,
    iterations: usize,
    objective: f64,
    omega: f64,
    sigma_hat: f64,
    residual_norm: f64,
    nnz: usize,
    theta: Vec<SparseEntry>,
}

fn status_error(status: SolveStatus, what: &str) -> CliResult<()> {
    match status {
        SolveStatus::Converged => Ok(()),
        SolveStatus::NonsmoothStop => Err(CliError::Nonsmooth(format!(
            "{what} reached the nonsmooth region of the loss; the last smooth iterate was written"
        ))),
        SolveStatus::MaxIter => Err(CliError::NotConverged(format!("{what} hit the iteration limit"))),
        SolveStatus::LineSearchFail => Err(CliError::NotConverged(format!("{what} line search failed"))),
    }
}

pub fn run_solve(args: &SolveArgs, seed: u64) -> CliResult<()> {
    check_positive("lambda", args.lambda)?;
    check_positive("eps", Some(args.eps))?;
    let problem = load_problem(&args.data)?;
    let (n, d) = (problem.n(), problem.d());
    let lambda = args.lambda.unwrap_or_else(|| default_lambda(n, d));
    let kind = LossKind::from(args.loss);
    let trace = args.trace.is_some();
    let theta0 = vec![0.0; d];
    let res: SolveResult = match args.algo {
        AlgoArg::Gd => {
            let mut cfg = GdConfig::new(lambda, args.eps).with_trace(trace);
            if let Some(m) = args.max_iter {
                cfg.max_iter = m;
            }
            solve_gd(&problem, kind, &cfg, &theta0)?
        }
        AlgoArg::Newton => {
            let mut cfg = NewtonConfig::new(lambda, args.eps).with_trace(trace);
            if let Some(m) = args.max_iter {
                cfg.max_outer = m;
            }
            solve_newton(&problem, kind, &cfg, &theta0)?
        }
    };

    ensure_dir(&args.out)?;
    let mut manifest = RunManifest::new("solve", args, seed)?;
    let report = SolveReport {
        schema_version: SCHEMA_VERSION,
        algo: args.algo,
        loss: args.loss,
        lambda,
        eps: args.eps,
        status: res.status.as_str(),
        iterations: res.iterations,
        objective: res.objective,
        omega: res.omega,
        sigma_hat: res.sigma_hat(n),
        residual_norm: res.residual_norm,
        nnz: res.theta_hat.iter().filter(|v| **v != 0.0).count(),
        theta: sparse(&res.theta_hat),
    };
    write_json(&args.out.join("result.json"), &report)?;
    manifest.add("result.json");
    if let (Some(path), Some(records)) = (&args.trace, &res.trace) {
        write_trace(&resolve(&args.out, path), records)?;
        manifest.add(path.display().to_string());
    }
    manifest.write(&args.out)?;
    status_error(res.status, "solver")
}

#[derive(Debug, Args, Serialize)]
pub struct PathArgs {
    /// Directory holding X.csv and y.csv.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = AlgoArg::Gd)]
    pub algo: AlgoArg,
    #[arg(long, value_enum, default_value_t = LossArg::Sqrt)]
    pub loss: LossArg,
    /// Number of stages [default: smallest N with stage ratio at least 0.9].
    #[arg(long)]
    pub n_stages: Option<usize>,
    /// Final regularization parameter [default: sqrt(log d / n)].
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_target: Option<f64>,
    /// Tolerance at the final stage.
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Tolerance of the intermediate stages.
    #[arg(long, value_enum, default_value_t = EpsRuleArg::QuarterLambda)]
    pub eps_rule: EpsRuleArg,
    /// Iteration budget per stage.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Write one trace CSV per stage under `<out>/traces/`.
    #[arg(long)]
    pub traces: bool,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct StageReport {
    stage: usize,
    lambda: f64,
    eps: f64,
    status: &'static str,
    iterations: usize,
    objective: f64,
    omega: f64,
    mse: f64,
    sigma_hat: f64,
    nnz: usize,
    trace_file: Option<String>,
}

#[derive(Serialize)]
struct PathReport {
    schema_version: u32,
    algo: AlgoArg,
    eps_rule: EpsRuleArg,
    eps_final: f64,
    lambda0: f64,
    lambda_target: f64,
    n_stages: usize,
    eta_lambda: f64,
    lambdas: Vec<f64>,
    stages: Vec<StageReport>,
    minimal_mse: f64,
    total_inner_iterations: usize,
    outcome: &'static str,
    aborted_stage: Option<usize>,
    theta: Vec<SparseEntry>,
}

pub fn run_path(args: &PathArgs, seed: u64) -> CliResult<()> {
    check_positive("lambda-target", args.lambda_target)?;
    check_positive("eps", Some(args.eps))?;
    if args.n_stages == Some(0) {
        return Err(CliError::Usage("--n-stages must be at least 1".into()));
    }
    let problem = load_problem(&args.data)?;
    let n = problem.n();
    let mut cfg = PathConfig::new(args.algo.into(), args.eps)
        .with_eps_rule(args.eps_rule.into())
        .with_trace(args.traces);
    cfg.n_stages = args.n_stages;
    cfg.lambda_target = args.lambda_target;
    cfg.max_iter = args.max_iter;
    let path = solve_path(&problem, args.loss.into(), &cfg)?;

    ensure_dir(&args.out)?;
    let mut manifest = RunManifest::new("path", args, seed)?;
    if args.traces {
        ensure_dir(&args.out.join("traces"))?;
    }
    let n_stages = if path.lambdas.len() == 1 { 1 } else { path.lambdas.len() - 1 };
    let mut stages = Vec::with_capacity(path.stage_results.len());
    for (k, res) in path.stage_results.iter().enumerate() {
        let lambda = path.stage_lambda(k);
        let eps = cfg.stage_eps(lambda, k + 1 == n_stages);
        let trace_file = match (&res.trace, args.traces) {
            (Some(records), true) => {
                let rel = format!("traces/stage_{:03}.csv", k + 1);
                write_trace(&args.out.join(&rel), records)?;
                manifest.add(rel.clone());
                Some(rel)
            }
            _ => None,
        };
        stages.push(StageReport {
            stage: k + 1,
            lambda,
            eps,
            status: res.status.as_str(),
            iterations: res.iterations,
            objective: res.objective,
            omega: res.omega,
            mse: res.mse(n),
            sigma_hat: res.sigma_hat(n),
            nnz: res.theta_hat.iter().filter(|v| **v != 0.0).count(),
            trace_file,
        });
    }
    let (outcome, aborted_stage, abort_status) = match path.outcome {
        PathOutcome::Completed => ("completed", None, None),
        PathOutcome::Aborted { stage, status } => ("aborted", Some(stage), Some(status)),
    };
    let report = PathReport {
        schema_version: SCHEMA_VERSION,
        algo: args.algo,
        eps_rule: args.eps_rule,
        eps_final: args.eps,
        lambda0: path.lambdas[0],
        lambda_target: *path.lambdas.last().expect("non-empty grid"),
        n_stages,
        eta_lambda: path.eta_lambda,
        lambdas: path.lambdas.clone(),
        stages,
        minimal_mse: path.minimal_mse,
        total_inner_iterations: path.total_inner_iterations,
        outcome,
        aborted_stage,
        theta: sparse(path.final_theta().unwrap_or(&[])),
    };
    write_json(&args.out.join("path.json"), &report)?;
    manifest.add("path.json");
    manifest.write(&args.out)?;

    if let (Some(stage), Some(status)) = (aborted_stage, abort_status) {
        return status_error(status, &format!("stage {stage}"));
    }
    match path.stage_results.iter().position(|r| !r.converged()) {
        Some(k) => status_error(path.stage_results[k].status, &format!("stage {}", k + 1)),
        None => Ok(()),
    }
}
